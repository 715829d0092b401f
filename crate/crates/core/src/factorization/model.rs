use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};

/// Latent factors. User and item vectors are stored contiguously
/// (`users[x * k..(x + 1) * k]` is the preference vector of user `x`);
/// `h` is the `k x k` correlation matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub k: usize,
    pub num_users: usize,
    pub num_items: usize,
    pub users: Vec<f64>,
    pub items: Vec<f64>,
    pub h: Option<Vec<f64>>,
}

impl ModelParams {
    pub fn zeros(k: usize, num_users: usize, num_items: usize, with_h: bool) -> Self {
        ModelParams {
            k,
            num_users,
            num_items,
            users: vec![0.0; k * num_users],
            items: vec![0.0; k * num_items],
            h: with_h.then(|| vec![0.0; k * k]),
        }
    }

    pub fn user(&self, x: usize) -> &[f64] {
        &self.users[x * self.k..(x + 1) * self.k]
    }

    pub fn item(&self, y: usize) -> &[f64] {
        &self.items[y * self.k..(y + 1) * self.k]
    }

    pub fn user_mut(&mut self, x: usize) -> &mut [f64] {
        let k = self.k;
        &mut self.users[x * k..(x + 1) * k]
    }

    pub fn item_mut(&mut self, y: usize) -> &mut [f64] {
        let k = self.k;
        &mut self.items[y * k..(y + 1) * k]
    }

    pub fn check_shape(&self) -> Result<()> {
        let ok = self.users.len() == self.k * self.num_users
            && self.items.len() == self.k * self.num_items
            && self.h.as_ref().is_none_or(|h| h.len() == self.k * self.k);
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "parameter buffers do not match k={} n={} m={}",
                self.k, self.num_users, self.num_items
            )))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.users
            .iter()
            .chain(&self.items)
            .chain(self.h.iter().flatten())
            .all(|v| v.is_finite())
    }

    /// `self - step * grad`, buffer by buffer.
    pub fn stepped(&self, grad: &ModelParams, step: f64) -> ModelParams {
        let sub = |a: &[f64], g: &[f64]| a.iter().zip(g).map(|(a, g)| a - step * g).collect();
        ModelParams {
            k: self.k,
            num_users: self.num_users,
            num_items: self.num_items,
            users: sub(&self.users, &grad.users),
            items: sub(&self.items, &grad.items),
            h: match (&self.h, &grad.h) {
                (Some(h), Some(g)) => Some(sub(h, g)),
                (h, _) => h.clone(),
            },
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A fitted model: factors plus what prediction needs for users and items
/// that had no training ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: ModelParams,
    pub global_mean: f64,
    pub user_seen: Vec<bool>,
    pub item_seen: Vec<bool>,
    /// Objective before the first step and after every accepted epoch.
    pub trace: Vec<f64>,
}

pub const RATING_MIN: f64 = 1.0;
pub const RATING_MAX: f64 = 5.0;

impl TrainedModel {
    /// `u_x . i_y` clamped to the rating scale; the global training mean
    /// for cold users or items.
    pub fn predict(&self, user: usize, item: usize) -> f64 {
        let warm = self.user_seen.get(user).copied().unwrap_or(false)
            && self.item_seen.get(item).copied().unwrap_or(false);
        if !warm {
            return self.global_mean;
        }
        dot(self.params.user(user), self.params.item(item)).clamp(RATING_MIN, RATING_MAX)
    }

    /// Text dump: a version header, the dimensions, then `U` (k x n),
    /// `I` (k x m) and `H` (k x k) row by row. Floats are written in their
    /// shortest round-tripping form, so `read` restores the model bit for
    /// bit. The training trace is not stored.
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        let p = &self.params;
        writeln!(w, "{MODEL_HEADER}")?;
        writeln!(
            w,
            "k {} n {} m {} h {}",
            p.k,
            p.num_users,
            p.num_items,
            u8::from(p.h.is_some())
        )?;
        writeln!(w, "mean {}", self.global_mean)?;
        writeln!(w, "U")?;
        write_transposed(&mut w, &p.users, p.num_users, p.k)?;
        writeln!(w, "I")?;
        write_transposed(&mut w, &p.items, p.num_items, p.k)?;
        if let Some(h) = &p.h {
            writeln!(w, "H")?;
            for row in h.chunks(p.k) {
                write_row(&mut w, row.iter().copied())?;
            }
        }
        writeln!(w, "seen_users {}", bits(&self.user_seen))?;
        writeln!(w, "seen_items {}", bits(&self.item_seen))?;
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = || -> Result<String> {
            match lines.next() {
                Some(Ok(l)) => Ok(l),
                Some(Err(e)) => Err(Error::Parse(e.to_string())),
                None => Err(Error::Parse("unexpected end of model dump".into())),
            }
        };
        if next()? != MODEL_HEADER {
            return Err(Error::Parse("not a model dump (bad header)".into()));
        }
        let dims: Vec<String> = next()?.split_whitespace().map(str::to_string).collect();
        let field = |name: &str| -> Result<usize> {
            dims.iter()
                .position(|d| d == name)
                .and_then(|p| dims.get(p + 1))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse(format!("missing dimension {name}")))
        };
        let (k, n, m, has_h) = (field("k")?, field("n")?, field("m")?, field("h")? == 1);
        let global_mean = parse_tagged(&next()?, "mean")?;

        expect(&next()?, "U")?;
        let users = read_transposed(&mut next, n, k)?;
        expect(&next()?, "I")?;
        let items = read_transposed(&mut next, m, k)?;
        let mut line = next()?;
        let h = if has_h {
            expect(&line, "H")?;
            let mut h = Vec::with_capacity(k * k);
            for _ in 0..k {
                h.extend(parse_row(&next()?, k)?);
            }
            line = next()?;
            Some(h)
        } else {
            None
        };
        let user_seen = parse_bits(&line, "seen_users", n)?;
        let item_seen = parse_bits(&next()?, "seen_items", m)?;
        Ok(TrainedModel {
            params: ModelParams {
                k,
                num_users: n,
                num_items: m,
                users,
                items,
                h,
            },
            global_mean,
            user_seen,
            item_seen,
            trace: Vec::new(),
        })
    }
}

const MODEL_HEADER: &str = "trustrec-model v1";

fn write_row<W: Write>(w: &mut W, values: impl Iterator<Item = f64>) -> io::Result<()> {
    let row: Vec<String> = values.map(|v| v.to_string()).collect();
    writeln!(w, "{}", row.join(" "))
}

/// Entity-major storage written as factor-major rows.
fn write_transposed<W: Write>(w: &mut W, data: &[f64], count: usize, k: usize) -> io::Result<()> {
    for f in 0..k {
        write_row(w, (0..count).map(|e| data[e * k + f]))?;
    }
    Ok(())
}

fn read_transposed(next: &mut impl FnMut() -> Result<String>, count: usize, k: usize) -> Result<Vec<f64>> {
    let mut data = vec![0.0; count * k];
    for f in 0..k {
        for (e, v) in parse_row(&next()?, count)?.into_iter().enumerate() {
            data[e * k + f] = v;
        }
    }
    Ok(data)
}

fn parse_row(line: &str, expected: usize) -> Result<Vec<f64>> {
    let row = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if row.len() != expected {
        return Err(Error::Parse(format!(
            "expected {expected} values, found {}",
            row.len()
        )));
    }
    Ok(row)
}

fn expect(line: &str, tag: &str) -> Result<()> {
    if line.trim() == tag {
        Ok(())
    } else {
        Err(Error::Parse(format!("expected section {tag}, found {line:?}")))
    }
}

fn parse_tagged(line: &str, tag: &str) -> Result<f64> {
    line.strip_prefix(tag)
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Parse(format!("expected {tag} line, found {line:?}")))
}

fn bits(flags: &[bool]) -> String {
    flags.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn parse_bits(line: &str, tag: &str, expected: usize) -> Result<Vec<bool>> {
    let body = line
        .strip_prefix(tag)
        .ok_or_else(|| Error::Parse(format!("expected {tag} line")))?
        .trim();
    let flags: Vec<bool> = body.chars().map(|c| c == '1').collect();
    if flags.len() != expected {
        return Err(Error::Parse(format!("{tag}: expected {expected} flags")));
    }
    Ok(flags)
}
