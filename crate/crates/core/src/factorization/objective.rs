use super::model::{dot, ModelParams};
use super::similarity::SimilarityMatrix;
use crate::dataset::Rating;
use crate::error::{Error, Result};
use crate::mtm::TrustScores;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Plain matrix factorization.
    Mf,
    /// Importance-weighted ratings plus social regularization.
    Locabal,
    /// Trust-weighted ratings plus reputation-weighted social
    /// regularization.
    LocabalPlus,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Mf => "MF",
            Variant::Locabal => "LOCABAL",
            Variant::LocabalPlus => "LOCABAL+",
        }
    }
}

/// Which objective to minimise and with what weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub variant: Variant,
    /// Weight of each training rating, aligned with the rating slice.
    pub rating_weights: Vec<f64>,
    /// Weight of neighbour `z` in the social term, per user.
    pub neighbor_weights: Vec<f64>,
}

impl ObjectiveSpec {
    pub fn mf(ratings: &[Rating], num_users: usize) -> Self {
        ObjectiveSpec {
            variant: Variant::Mf,
            rating_weights: vec![1.0; ratings.len()],
            neighbor_weights: vec![1.0; num_users],
        }
    }

    /// Every rating of user `x` weighted by `importance[x]`.
    pub fn locabal(ratings: &[Rating], importance: &[f64]) -> Self {
        ObjectiveSpec {
            variant: Variant::Locabal,
            rating_weights: ratings.iter().map(|r| importance[r.user]).collect(),
            neighbor_weights: vec![1.0; importance.len()],
        }
    }

    /// Ratings weighted by their multi-faceted trust, neighbours by their
    /// reputation.
    pub fn locabal_plus(ratings: &[Rating], trust: &TrustScores) -> Result<Self> {
        let rating_weights = ratings
            .iter()
            .map(|r| {
                trust.mft(r.user, r.item).ok_or_else(|| {
                    Error::DimensionMismatch(format!("no trust for rating ({}, {})", r.user, r.item))
                })
            })
            .collect::<Result<_>>()?;
        Ok(ObjectiveSpec {
            variant: Variant::LocabalPlus,
            rating_weights,
            neighbor_weights: trust.mgr.clone(),
        })
    }
}

/// Everything the objective depends on besides the parameters.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub ratings: &'a [Rating],
    pub similarity: &'a SimilarityMatrix,
    pub spec: &'a ObjectiveSpec,
    pub alpha: f64,
    pub lambda: f64,
}

impl Problem<'_> {
    /// The social term (and `H`) is present only for the social variants
    /// with a positive `alpha`.
    pub fn uses_social_term(&self) -> bool {
        self.spec.variant != Variant::Mf && self.alpha > 0.0
    }

    fn check(&self, p: &ModelParams) -> Result<()> {
        p.check_shape()?;
        if self.spec.rating_weights.len() != self.ratings.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} rating weights for {} ratings",
                self.spec.rating_weights.len(),
                self.ratings.len()
            )));
        }
        if self.uses_social_term() != p.h.is_some() {
            return Err(Error::DimensionMismatch(
                "correlation matrix H must be present exactly when the social term is".into(),
            ));
        }
        if let Some(r) = self
            .ratings
            .iter()
            .find(|r| r.user >= p.num_users || r.item >= p.num_items)
        {
            return Err(Error::DimensionMismatch(format!(
                "rating ({}, {}) outside a {}x{} model",
                r.user, r.item, p.num_users, p.num_items
            )));
        }
        if self.uses_social_term() {
            if self.spec.neighbor_weights.len() != p.num_users {
                return Err(Error::DimensionMismatch(
                    "neighbour weights do not cover every user".into(),
                ));
            }
            if self
                .similarity
                .entries()
                .iter()
                .any(|&(x, z, _)| x >= p.num_users || z >= p.num_users)
            {
                return Err(Error::DimensionMismatch(
                    "similarity entry outside the model".into(),
                ));
            }
        }
        Ok(())
    }
}

/// `h * v` for a row-major `k x k` matrix.
fn mat_vec(h: &[f64], v: &[f64], out: &mut [f64]) {
    let k = v.len();
    for (a, o) in out.iter_mut().enumerate() {
        *o = dot(&h[a * k..(a + 1) * k], v);
    }
}

/// `h^T * v`.
fn mat_t_vec(h: &[f64], v: &[f64], out: &mut [f64]) {
    let k = v.len();
    out.iter_mut().for_each(|o| *o = 0.0);
    for (a, &va) in v.iter().enumerate() {
        for (b, o) in out.iter_mut().enumerate() {
            *o += h[a * k + b] * va;
        }
    }
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Weighted squared rating error, plus `alpha` times the weighted squared
/// social error on every directed link, plus `lambda` times the squared
/// Frobenius norms of the parameters.
pub fn objective(p: &ModelParams, prob: &Problem<'_>) -> Result<f64> {
    prob.check(p)?;
    let mut total = 0.0;
    for (r, w) in prob.ratings.iter().zip(&prob.spec.rating_weights) {
        let e = r.value - dot(p.user(r.user), p.item(r.item));
        total += w * e * e;
    }
    if let Some(h) = p.h.as_deref().filter(|_| prob.uses_social_term()) {
        let mut hz = vec![0.0; p.k];
        let mut social = 0.0;
        for &(x, z, s) in prob.similarity.entries() {
            mat_vec(h, p.user(z), &mut hz);
            let d = s - dot(p.user(x), &hz);
            social += prob.spec.neighbor_weights[z] * d * d;
        }
        total += prob.alpha * social;
    }
    let norms = sq_norm(&p.users) + sq_norm(&p.items) + p.h.as_deref().map_or(0.0, sq_norm);
    Ok(total + prob.lambda * norms)
}

/// Analytic gradient of [`objective`] with respect to every parameter,
/// returned in the same layout as the parameters.
pub fn gradients(p: &ModelParams, prob: &Problem<'_>) -> Result<ModelParams> {
    prob.check(p)?;
    let k = p.k;
    let mut g = ModelParams::zeros(k, p.num_users, p.num_items, p.h.is_some());

    for (r, w) in prob.ratings.iter().zip(&prob.spec.rating_weights) {
        let (u, i) = (p.user(r.user), p.item(r.item));
        let c = -2.0 * w * (r.value - dot(u, i));
        for f in 0..k {
            g.users[r.user * k + f] += c * i[f];
            g.items[r.item * k + f] += c * u[f];
        }
    }

    if let (Some(h), Some(gh)) = (p.h.as_deref(), g.h.as_mut()) {
        let mut hz = vec![0.0; k];
        let mut htx = vec![0.0; k];
        for &(x, z, s) in prob.similarity.entries() {
            let (ux, uz) = (p.user(x), p.user(z));
            mat_vec(h, uz, &mut hz);
            mat_t_vec(h, ux, &mut htx);
            let c = -2.0 * prob.alpha * prob.spec.neighbor_weights[z] * (s - dot(ux, &hz));
            for f in 0..k {
                g.users[x * k + f] += c * hz[f];
                g.users[z * k + f] += c * htx[f];
            }
            for a in 0..k {
                for b in 0..k {
                    gh[a * k + b] += c * ux[a] * uz[b];
                }
            }
        }
    }

    let two_lambda = 2.0 * prob.lambda;
    for (gv, v) in g.users.iter_mut().zip(&p.users) {
        *gv += two_lambda * v;
    }
    for (gv, v) in g.items.iter_mut().zip(&p.items) {
        *gv += two_lambda * v;
    }
    if let (Some(gh), Some(h)) = (g.h.as_mut(), p.h.as_ref()) {
        for (gv, v) in gh.iter_mut().zip(h) {
            *gv += two_lambda * v;
        }
    }
    Ok(g)
}
