//! Matrix factorization with optional trust weighting and social
//! regularization, trained by full-batch gradient descent.

mod model;
mod objective;
mod similarity;

use rand::Rng;

pub use model::{ModelParams, TrainedModel, RATING_MAX, RATING_MIN};
pub use objective::{gradients, objective, ObjectiveSpec, Problem, Variant};
pub use similarity::{build_similarity, co_rated, pearson, SimilarityMatrix};

use crate::dataset::Rating;
use crate::error::{Error, Result};
use crate::rng;

/// Halvings tried per epoch before the step is abandoned.
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    /// Latent dimension.
    pub k: usize,
    /// Weight of the social regularization term.
    pub alpha: f64,
    /// Weight of the Frobenius regularization.
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Initial factors are drawn from `U(-init_scale, init_scale)`.
    pub init_scale: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            k: 50,
            alpha: 0.0,
            lambda: 0.05,
            learning_rate: 0.01,
            epochs: 100,
            seed: 0,
            init_scale: 0.1,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(Error::InvalidArgument(format!(
                "{what} (hyperparameters {self:?})"
            )))
        };
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.alpha.is_nan() || self.alpha < 0.0 || self.lambda.is_nan() || self.lambda < 0.0 {
            return bad("alpha and lambda must be non-negative");
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return bad("learning rate must be positive");
        }
        if self.init_scale.is_nan() || self.init_scale <= 0.0 {
            return bad("init scale must be positive");
        }
        Ok(())
    }
}

/// Seeded uniform initialisation: users first, then items, then `H`.
pub fn initialize(num_users: usize, num_items: usize, with_h: bool, hp: &HyperParams) -> ModelParams {
    let mut rng = rng::stream(hp.seed, rng::STREAM_INIT);
    let s = hp.init_scale;
    let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.gen_range(-s..s)).collect() };
    let users = draw(hp.k * num_users);
    let items = draw(hp.k * num_items);
    let h = with_h.then(|| draw(hp.k * hp.k));
    ModelParams {
        k: hp.k,
        num_users,
        num_items,
        users,
        items,
        h,
    }
}

/// Train on `ratings` (indices below `num_users` / `num_items`).
///
/// Each epoch takes one gradient step. If the step does not decrease the
/// objective the learning rate is halved and the step retried, so the
/// recorded trace never increases. Training stops early once no halving
/// yields a decrease.
pub fn train(
    num_users: usize,
    num_items: usize,
    ratings: &[Rating],
    spec: &ObjectiveSpec,
    similarity: &SimilarityMatrix,
    hp: &HyperParams,
) -> Result<TrainedModel> {
    hp.validate()?;
    let prob = Problem {
        ratings,
        similarity,
        spec,
        alpha: hp.alpha,
        lambda: hp.lambda,
    };
    let mut params = initialize(num_users, num_items, prob.uses_social_term(), hp);
    let mut current = objective(&params, &prob)?;
    if !current.is_finite() {
        return Err(Error::Divergence { epoch: 0 });
    }
    let mut trace = Vec::with_capacity(hp.epochs + 1);
    trace.push(current);
    let mut lr = hp.learning_rate;

    'epochs: for epoch in 1..=hp.epochs {
        let grad = gradients(&params, &prob)?;
        if !grad.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        for _ in 0..=MAX_HALVINGS {
            let candidate = params.stepped(&grad, lr);
            let value = objective(&candidate, &prob)?;
            if value.is_finite() && value <= current {
                params = candidate;
                current = value;
                trace.push(current);
                continue 'epochs;
            }
            lr *= 0.5;
        }
        break;
    }

    let mut user_seen = vec![false; num_users];
    let mut item_seen = vec![false; num_items];
    for r in ratings {
        user_seen[r.user] = true;
        item_seen[r.item] = true;
    }
    let global_mean = if ratings.is_empty() {
        (RATING_MIN + RATING_MAX) / 2.0
    } else {
        ratings.iter().map(|r| r.value).sum::<f64>() / ratings.len() as f64
    };
    Ok(TrainedModel {
        params,
        global_mean,
        user_seen,
        item_seen,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Vec<Rating> {
        let mut out = Vec::new();
        for user in 0..5 {
            for item in 0..6 {
                if (user + item) % 3 != 0 {
                    out.push(Rating {
                        user,
                        item,
                        value: (1 + (user * 2 + item) % 5) as f64,
                    });
                }
            }
        }
        out
    }

    fn hp(epochs: usize) -> HyperParams {
        HyperParams {
            k: 3,
            epochs,
            seed: 9,
            learning_rate: 0.05,
            ..HyperParams::default()
        }
    }

    #[test]
    fn zero_epochs_returns_initialisation() {
        let r = toy();
        let spec = ObjectiveSpec::mf(&r, 5);
        let m = train(5, 6, &r, &spec, &SimilarityMatrix::default(), &hp(0)).unwrap();
        assert_eq!(m.params, initialize(5, 6, false, &hp(0)));
        assert_eq!(m.trace.len(), 1);
    }

    #[test]
    fn training_is_deterministic_and_descends() {
        let r = toy();
        let spec = ObjectiveSpec::mf(&r, 5);
        let s = SimilarityMatrix::default();
        let a = train(5, 6, &r, &spec, &s, &hp(200)).unwrap();
        let b = train(5, 6, &r, &spec, &s, &hp(200)).unwrap();
        assert_eq!(a, b);
        assert!(a.trace.last().unwrap() <= &a.trace[0]);
        assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(a.trace.last().unwrap() < &(0.5 * a.trace[0]));
    }

    #[test]
    fn predictions_clamp_and_fall_back() {
        let r = toy();
        let spec = ObjectiveSpec::mf(&r, 5);
        let mut m = train(6, 7, &r, &spec, &SimilarityMatrix::default(), &hp(0)).unwrap();
        let mean = r.iter().map(|x| x.value).sum::<f64>() / r.len() as f64;
        assert_eq!(m.predict(5, 0), mean);
        assert_eq!(m.predict(0, 6), mean);
        assert_eq!(m.predict(99, 99), mean);

        m.params.user_mut(0).iter_mut().for_each(|v| *v = 0.0);
        assert_eq!(m.predict(0, 0), 1.0);
        m.params.user_mut(0).copy_from_slice(&[4.2, 0.0, 0.0]);
        m.params.item_mut(0).copy_from_slice(&[1.0, 0.0, 0.0]);
        assert_eq!(m.predict(0, 0), 4.2);
        m.params.item_mut(0).copy_from_slice(&[2.0, 0.0, 0.0]);
        assert_eq!(m.predict(0, 0), 5.0);
    }

    #[test]
    fn model_dump_round_trips_bitwise() {
        let r = toy();
        let spec = ObjectiveSpec::locabal(&r, &[1.0, 0.5, 0.4, 0.3, 0.2, 0.1]);
        let s = SimilarityMatrix::from_entries(vec![(0, 1, 0.5), (1, 0, 0.5)]);
        let hp = HyperParams { alpha: 0.3, ..hp(5) };
        let m = train(6, 6, &r, &spec, &s, &hp).unwrap();
        assert!(m.params.h.is_some());
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        let back = TrainedModel::read(buf.as_slice()).unwrap();
        assert_eq!(back.params, m.params);
        assert_eq!(back.global_mean.to_bits(), m.global_mean.to_bits());
        assert_eq!(back.user_seen, m.user_seen);
        assert_eq!(back.item_seen, m.item_seen);
        assert!(TrainedModel::read(&b"garbage\n"[..]).is_err());
    }

    #[test]
    fn invalid_hyperparameters() {
        let r = toy();
        let spec = ObjectiveSpec::mf(&r, 5);
        let s = SimilarityMatrix::default();
        for bad in [
            HyperParams { k: 0, ..hp(1) },
            HyperParams { alpha: -1.0, ..hp(1) },
            HyperParams {
                learning_rate: 0.0,
                ..hp(1)
            },
        ] {
            assert!(train(5, 6, &r, &spec, &s, &bad).is_err());
        }
    }

    #[test]
    fn h_presence_must_match_the_objective() {
        let r = toy();
        let spec = ObjectiveSpec::mf(&r, 5);
        let s = SimilarityMatrix::default();
        let prob = Problem {
            ratings: &r,
            similarity: &s,
            spec: &spec,
            alpha: 0.0,
            lambda: 0.1,
        };
        let with_h = ModelParams::zeros(2, 5, 6, true);
        assert!(matches!(
            objective(&with_h, &prob),
            Err(Error::DimensionMismatch(_))
        ));
        let small = ModelParams::zeros(2, 3, 6, false);
        assert!(matches!(
            gradients(&small, &prob),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn zero_parameters_give_weighted_sum_of_squares() {
        let r = toy();
        let importance = [1.0, 0.5, 0.25, 0.2, 0.1];
        let spec = ObjectiveSpec::locabal(&r, &importance);
        let s = SimilarityMatrix::default();
        let prob = Problem {
            ratings: &r,
            similarity: &s,
            spec: &spec,
            alpha: 0.0,
            lambda: 0.0,
        };
        let expected: f64 = r.iter().map(|x| importance[x.user] * x.value * x.value).sum();
        let got = objective(&ModelParams::zeros(3, 5, 6, false), &prob).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn frobenius_only_gradient() {
        let s = SimilarityMatrix::default();
        let spec = ObjectiveSpec::mf(&[], 3);
        let prob = Problem {
            ratings: &[],
            similarity: &s,
            spec: &spec,
            alpha: 0.0,
            lambda: 0.7,
        };
        let p = initialize(3, 4, false, &hp(0));
        let g = gradients(&p, &prob).unwrap();
        for (gv, v) in g.users.iter().zip(&p.users) {
            assert_eq!(*gv, 2.0 * 0.7 * v);
        }
    }

    #[test]
    fn stationary_point_has_zero_gradient() {
        // one rating of 4 with k = 1 and no regularization: u * i = 4
        let r = [Rating {
            user: 0,
            item: 0,
            value: 4.0,
        }];
        let spec = ObjectiveSpec::mf(&r, 1);
        let s = SimilarityMatrix::default();
        let prob = Problem {
            ratings: &r,
            similarity: &s,
            spec: &spec,
            alpha: 0.0,
            lambda: 0.0,
        };
        let mut p = ModelParams::zeros(1, 1, 1, false);
        p.users[0] = 2.0;
        p.items[0] = 2.0;
        let g = gradients(&p, &prob).unwrap();
        assert_eq!((g.users[0], g.items[0]), (0.0, 0.0));
    }
}
