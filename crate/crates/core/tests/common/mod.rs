//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code it checks.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use rand::Rng;

use trustrec::dataset::{Dataset, FeedbackSchema, Item, User};
use trustrec::factorization::{gradients, objective, ModelParams, Problem};

/// Central finite-difference partials of the objective with respect to every
/// parameter, laid out like `ModelParams`.
pub fn finite_difference(p: &ModelParams, prob: &Problem<'_>, h: f64) -> ModelParams {
    let f = |q: &ModelParams| objective(q, prob).unwrap();
    let mut g = ModelParams::zeros(p.k, p.num_users, p.num_items, p.h.is_some());
    let probe = |get: fn(&mut ModelParams) -> &mut Vec<f64>, out: &mut Vec<f64>| {
        let len = get(&mut p.clone()).len();
        for (j, slot) in out.iter_mut().enumerate().take(len) {
            let mut plus = p.clone();
            let mut minus = p.clone();
            get(&mut plus)[j] += h;
            get(&mut minus)[j] -= h;
            *slot = (f(&plus) - f(&minus)) / (2.0 * h);
        }
    };
    probe(|q| &mut q.users, &mut g.users);
    probe(|q| &mut q.items, &mut g.items);
    if p.h.is_some() {
        let mut out = vec![0.0; p.k * p.k];
        probe(|q| q.h.as_mut().unwrap(), &mut out);
        g.h = Some(out);
    }
    g
}

/// Largest relative error between analytic and numeric partials, using
/// `max(1, |a|, |b|)` as the scale so that near-zero partials are compared
/// absolutely.
pub fn max_gradient_error(p: &ModelParams, prob: &Problem<'_>, h: f64) -> f64 {
    let analytic = gradients(p, prob).unwrap();
    let numeric = finite_difference(p, prob, h);
    let pairs = analytic
        .users
        .iter()
        .zip(&numeric.users)
        .chain(analytic.items.iter().zip(&numeric.items))
        .chain(analytic.h.iter().flatten().zip(numeric.h.iter().flatten()));
    pairs
        .map(|(a, b)| (a - b).abs() / 1f64.max(a.abs()).max(b.abs()))
        .fold(0.0, f64::max)
}

/// Column-stochastic transition matrix of a directed graph with damping and
/// uniform teleport; dangling columns teleport uniformly.
pub fn google_matrix(n: usize, links: &[(usize, usize)], damping: f64) -> DMatrix<f64> {
    let mut out_deg = vec![0usize; n];
    for &(a, _) in links {
        out_deg[a] += 1;
    }
    let nf = n as f64;
    let mut g = DMatrix::from_element(n, n, (1.0 - damping) / nf);
    for j in 0..n {
        if out_deg[j] == 0 {
            for i in 0..n {
                g[(i, j)] += damping / nf;
            }
        }
    }
    for &(a, b) in links {
        g[(b, a)] += damping / out_deg[a] as f64;
    }
    g
}

/// Dense power iteration to machine precision.
pub fn dense_pagerank(n: usize, links: &[(usize, usize)], damping: f64) -> Vec<f64> {
    let g = google_matrix(n, links, damping);
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..10_000 {
        let next = &g * &x;
        let diff = (&next - &x).abs().sum();
        x = next;
        if diff < 1e-15 {
            break;
        }
    }
    x.iter().copied().collect()
}

/// Stationary vector by a direct solve of `(I - G) x = 0, sum x = 1`.
pub fn solved_pagerank(n: usize, links: &[(usize, usize)], damping: f64) -> Vec<f64> {
    let g = google_matrix(n, links, damping);
    let mut a = DMatrix::<f64>::identity(n, n) - g;
    let mut b = DVector::zeros(n);
    for j in 0..n {
        a[(0, j)] = 1.0;
    }
    b[0] = 1.0;
    let x = a.lu().solve(&b).expect("stationary system is non-singular");
    x.iter().copied().collect()
}

/// Exact rational.
pub type Q = Ratio<u64>;

pub fn q(num: u64, den: u64) -> Q {
    Ratio::new(num, den)
}

pub fn zero() -> Q {
    Ratio::from_integer(0)
}

pub fn to_f64(r: Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Brute-force P, R, AP, RR of a ranked list, straight from the
/// definitions, in exact arithmetic.
pub struct BruteScores {
    pub precision: Q,
    pub recall: Q,
    pub average_precision: Q,
    pub reciprocal_rank: Q,
}

pub fn brute_scores(list: &[usize], relevant: &[usize]) -> BruteScores {
    let is_rel = |i: &usize| relevant.contains(i);
    let hits = list.iter().filter(|i| is_rel(i)).count() as u64;
    let precision = if list.is_empty() {
        zero()
    } else {
        q(hits, list.len() as u64)
    };
    if relevant.is_empty() {
        return BruteScores {
            precision,
            recall: zero(),
            average_precision: zero(),
            reciprocal_rank: zero(),
        };
    }
    let mut ap = zero();
    for j in 1..=list.len() {
        if is_rel(&list[j - 1]) {
            let p_at_j = q(list[..j].iter().filter(|i| is_rel(i)).count() as u64, j as u64);
            ap += p_at_j;
        }
    }
    let rr = list
        .iter()
        .position(is_rel)
        .map_or(zero(), |p| q(1, p as u64 + 1));
    BruteScores {
        precision,
        recall: q(hits, relevant.len() as u64),
        average_precision: ap / relevant.len() as u64,
        reciprocal_rank: rr,
    }
}

/// Every ordered selection (without repetition) of `0..n` of length `len`.
pub fn arrangements(n: usize, len: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                go(n, len, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, len, &mut Vec::new(), &mut out);
    out
}

/// A small random dataset with random feedback. Some draws leave feedback
/// entirely zero so that the 0/0 conventions are exercised.
pub fn random_dataset(rng: &mut impl Rng, schema: FeedbackSchema) -> Dataset {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=5);
    let sparse = rng.gen_bool(0.2);
    let draw = |rng: &mut dyn rand::RngCore, hi: u64| {
        if sparse {
            0
        } else {
            rng.gen_range(0..=hi)
        }
    };
    let mut b = Dataset::builder(schema);
    for u in 0..n {
        let mut user = User::new(format!("u{u}"));
        user.elite_years = draw(rng, 3);
        user.compliments_more = draw(rng, 4);
        user.compliments_thanks = draw(rng, 4);
        user.compliments_great_writer = draw(rng, 4);
        user.fans = draw(rng, 5);
        b.add_user(user).unwrap();
    }
    for i in 0..m {
        b.add_item(Item {
            item_id: format!("i{i}"),
            tags: vec![],
        })
        .unwrap();
    }
    for u in 0..n {
        for i in 0..m {
            if rng.gen_bool(0.5) {
                let pn = schema == FeedbackSchema::PositiveNegative;
                let pos = pn.then(|| draw(rng, 6));
                let neg = pn.then(|| draw(rng, 6));
                let (useful, funny, cool) = (draw(rng, 5), draw(rng, 3), draw(rng, 3));
                let rating = rng.gen_range(1..=5);
                b.add_review(
                    &format!("u{u}"),
                    &format!("i{i}"),
                    rating,
                    useful,
                    funny,
                    cool,
                    pos,
                    neg,
                )
                .unwrap();
            }
            if rng.gen_bool(0.3) {
                let like = draw(rng, 4);
                b.add_tip(&format!("u{u}"), &format!("i{i}"), like).unwrap();
            }
        }
    }
    for a in 0..n {
        for c in a + 1..n {
            if rng.gen_bool(0.4) {
                b.add_friend(&format!("u{a}"), &format!("u{c}")).unwrap();
            }
        }
    }
    b.build()
}
