//! From-scratch dense classifier: character embedding, two GELU hidden
//! layers with inverted dropout, a logistic head, and exact reverse-mode
//! gradients of mean binary cross-entropy.
//!
//! All math is 64-bit. Inference is fully deterministic (no dropout, no
//! scaling residue), which the spoofing loop relies on; train-mode dropout
//! zeroes each hidden activation independently with the configured rate and
//! scales survivors by `1/(1-rate)`.

mod adamw;
mod checkpoint;

pub use adamw::{AdamWParams, TrainerState};
pub use checkpoint::{load_model, save_model};

use crate::seq::{RngState, Sequence};
use crate::{Error, Result};
use ndarray::{Array1, Array2, Axis};

/// Probability clamp used inside BCE only; raw probabilities are reported
/// unclamped.
pub const BCE_EPSILON: f64 = 1e-7;

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub alphabet_size: usize,
    pub seq_len: usize,
    pub embed_dim: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub dropout: f64,
}

impl MlpConfig {
    /// Reference architecture: 32-dimensional embedding, hidden sizes 512
    /// and 256, dropout 0.1.
    pub fn reference(alphabet_size: usize, seq_len: usize) -> Self {
        MlpConfig {
            alphabet_size,
            seq_len,
            embed_dim: 32,
            hidden1: 512,
            hidden2: 256,
            dropout: 0.1,
        }
    }

    /// Concatenated embedding width fed to the first hidden layer
    /// (9 x 32 = 288 at reference scale).
    pub fn input_dim(&self) -> usize {
        self.seq_len * self.embed_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphabet_size < 2
            || self.seq_len == 0
            || self.embed_dim == 0
            || self.hidden1 == 0
            || self.hidden2 == 0
        {
            return Err(Error::ShapeMismatch(format!("degenerate MLP config {self:?}")));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::ShapeMismatch(format!(
                "dropout rate must be in [0, 1), got {}",
                self.dropout
            )));
        }
        Ok(())
    }
}

/// Dropout behavior selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Inference,
}

/// Embedding table plus the dense stack. Owns every learned parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub config: MlpConfig,
    pub embedding: Array2<f64>, // K x embed_dim
    pub w1: Array2<f64>,        // input_dim x hidden1
    pub b1: Array1<f64>,
    pub w2: Array2<f64>, // hidden1 x hidden2
    pub b2: Array1<f64>,
    pub w3: Array2<f64>, // hidden2 x 1
    pub b3: Array1<f64>, // 1
}

/// Gradient (or moment) tensors shaped exactly like [`MlpModel`].
#[derive(Debug, Clone)]
pub struct Gradients {
    pub embedding: Array2<f64>,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub w3: Array2<f64>,
    pub b3: Array1<f64>,
}

impl Gradients {
    pub fn zeros(config: &MlpConfig) -> Self {
        Gradients {
            embedding: Array2::zeros((config.alphabet_size, config.embed_dim)),
            w1: Array2::zeros((config.input_dim(), config.hidden1)),
            b1: Array1::zeros(config.hidden1),
            w2: Array2::zeros((config.hidden1, config.hidden2)),
            b2: Array1::zeros(config.hidden2),
            w3: Array2::zeros((config.hidden2, 1)),
            b3: Array1::zeros(1),
        }
    }
}

/// Exact-erf GELU: `x * Phi(x)` with `Phi` the standard normal CDF.
pub fn gelu(x: f64) -> f64 {
    x * normal_cdf(x)
}

/// d/dx gelu(x) = Phi(x) + x * phi(x).
pub fn gelu_derivative(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.3989422804014327;
    normal_cdf(x) + x * INV_SQRT_2PI * (-0.5 * x * x).exp()
}

fn normal_cdf(x: f64) -> f64 {
    const INV_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
    0.5 * (1.0 + libm::erf(x * INV_SQRT_2))
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy with the documented clamp: probabilities enter the
/// logs clamped to `[BCE_EPSILON, 1 - BCE_EPSILON]`.
pub fn bce_loss(p: f64, label: f64) -> f64 {
    let p = p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
    -(label * p.ln() + (1.0 - label) * (1.0 - p).ln())
}

/// Everything backward needs from the matching forward pass, including the
/// dropout masks so gradients route through exactly the units that fired.
pub struct ForwardCache {
    mode: Mode,
    batch: Vec<Sequence>,
    x: Array2<f64>,
    z1: Array2<f64>,
    h1: Array2<f64>, // post-gelu, post-dropout
    mask1: Option<Array2<f64>>,
    z2: Array2<f64>,
    h2: Array2<f64>,
    mask2: Option<Array2<f64>>,
    probabilities: Vec<f64>,
}

impl ForwardCache {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn batch_len(&self) -> usize {
        self.batch.len()
    }
}

impl MlpModel {
    /// Seeded initialization: weights uniform in
    /// `+-sqrt(6 / (fan_in + fan_out))`, embeddings uniform in `+-0.05`,
    /// biases zero. Draw order is embedding row-major, then w1, w2, w3.
    pub fn init(config: MlpConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = RngState::new(seed);
        let mut uniform = |rows: usize, cols: usize, bound: f64| -> Array2<f64> {
            Array2::from_shape_fn((rows, cols), |_| (rng.unit() * 2.0 - 1.0) * bound)
        };
        let embedding = uniform(config.alphabet_size, config.embed_dim, 0.05);
        let glorot = |fan_in: usize, fan_out: usize| (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w1 = uniform(config.input_dim(), config.hidden1, glorot(config.input_dim(), config.hidden1));
        let w2 = uniform(config.hidden1, config.hidden2, glorot(config.hidden1, config.hidden2));
        let w3 = uniform(config.hidden2, 1, glorot(config.hidden2, 1));
        Ok(MlpModel {
            b1: Array1::zeros(config.hidden1),
            b2: Array1::zeros(config.hidden2),
            b3: Array1::zeros(1),
            embedding,
            w1,
            w2,
            w3,
            config,
        })
    }

    /// All-zero parameters; every input maps to probability exactly 0.5.
    pub fn zeros(config: MlpConfig) -> Result<Self> {
        config.validate()?;
        Ok(MlpModel {
            embedding: Array2::zeros((config.alphabet_size, config.embed_dim)),
            w1: Array2::zeros((config.input_dim(), config.hidden1)),
            b1: Array1::zeros(config.hidden1),
            w2: Array2::zeros((config.hidden1, config.hidden2)),
            b2: Array1::zeros(config.hidden2),
            w3: Array2::zeros((config.hidden2, 1)),
            b3: Array1::zeros(1),
            config,
        })
    }

    fn embed_batch(&self, batch: &[Sequence]) -> Result<Array2<f64>> {
        let e = self.config.embed_dim;
        let mut x = Array2::zeros((batch.len(), self.config.input_dim()));
        for (i, seq) in batch.iter().enumerate() {
            if seq.len() != self.config.seq_len {
                return Err(Error::ShapeMismatch(format!(
                    "sequence length {} does not match model seq_len {}",
                    seq.len(),
                    self.config.seq_len
                )));
            }
            for (pos, &sym) in seq.indices().iter().enumerate() {
                if sym as usize >= self.config.alphabet_size {
                    return Err(Error::ShapeMismatch(format!(
                        "symbol index {sym} out of range for alphabet size {}",
                        self.config.alphabet_size
                    )));
                }
                x.slice_mut(ndarray::s![i, pos * e..(pos + 1) * e])
                    .assign(&self.embedding.row(sym as usize));
            }
        }
        Ok(x)
    }

    /// Forward pass keeping every intermediate needed by [`Self::backward`].
    /// Train mode draws dropout masks from `rng`; inference ignores it.
    pub fn forward_cached(
        &self,
        batch: &[Sequence],
        mode: Mode,
        rng: &mut RngState,
    ) -> Result<ForwardCache> {
        let x = self.embed_batch(batch)?;
        let z1 = x.dot(&self.w1) + &self.b1;
        let a1 = z1.mapv(gelu);
        let (h1, mask1) = self.apply_dropout(a1, mode, rng);
        let z2 = h1.dot(&self.w2) + &self.b2;
        let a2 = z2.mapv(gelu);
        let (h2, mask2) = self.apply_dropout(a2, mode, rng);
        let z3 = h2.dot(&self.w3) + &self.b3;
        let probabilities = z3.column(0).iter().map(|&z| sigmoid(z)).collect();
        Ok(ForwardCache {
            mode,
            batch: batch.to_vec(),
            x,
            z1,
            h1,
            mask1,
            z2,
            h2,
            mask2,
            probabilities,
        })
    }

    /// Batched inference probabilities (deterministic).
    pub fn predict_batch(&self, batch: &[Sequence]) -> Result<Vec<f64>> {
        // rng untouched in inference mode
        let mut rng = RngState::new(0);
        Ok(self
            .forward_cached(batch, Mode::Inference, &mut rng)?
            .probabilities
            .clone())
    }

    /// The classifier's confidence that `s` is a replicator.
    pub fn predict_confidence(&self, s: &Sequence) -> Result<f64> {
        Ok(self.predict_batch(std::slice::from_ref(s))?[0])
    }

    fn apply_dropout(
        &self,
        activations: Array2<f64>,
        mode: Mode,
        rng: &mut RngState,
    ) -> (Array2<f64>, Option<Array2<f64>>) {
        let rate = self.config.dropout;
        if mode == Mode::Inference || rate == 0.0 {
            return (activations, None);
        }
        let keep_scale = 1.0 / (1.0 - rate);
        let mask = Array2::from_shape_fn(activations.raw_dim(), |_| {
            if rng.unit() < rate {
                0.0
            } else {
                keep_scale
            }
        });
        (&activations * &mask, Some(mask))
    }

    /// Mean-BCE loss of a cached forward pass against `labels`.
    pub fn mean_loss(cache: &ForwardCache, labels: &[f64]) -> f64 {
        cache
            .probabilities
            .iter()
            .zip(labels)
            .map(|(&p, &y)| bce_loss(p, y))
            .sum::<f64>()
            / cache.probabilities.len() as f64
    }

    /// Exact analytic gradients of mean BCE with respect to every parameter,
    /// reusing the cache's dropout masks. `expected_mode` must match the
    /// mode of the forward pass that produced `cache`.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        labels: &[f64],
        expected_mode: Mode,
    ) -> Result<Gradients> {
        if cache.mode != expected_mode {
            return Err(Error::ModeMismatch {
                cached: format!("{:?}", cache.mode),
                requested: format!("{expected_mode:?}"),
            });
        }
        let batch_size = cache.batch.len();
        if labels.len() != batch_size {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for a batch of {batch_size}",
                labels.len()
            )));
        }

        // d(mean BCE)/d(logit) = (p - y) / B
        let mut dz3 = Array2::zeros((batch_size, 1));
        for i in 0..batch_size {
            dz3[[i, 0]] = (cache.probabilities[i] - labels[i]) / batch_size as f64;
        }

        let gw3 = cache.h2.t().dot(&dz3);
        let gb3 = dz3.sum_axis(Axis(0));

        let mut dh2 = dz3.dot(&self.w3.t());
        if let Some(mask) = &cache.mask2 {
            dh2 *= mask;
        }
        let dz2 = &dh2 * &cache.z2.mapv(gelu_derivative);

        let gw2 = cache.h1.t().dot(&dz2);
        let gb2 = dz2.sum_axis(Axis(0));

        let mut dh1 = dz2.dot(&self.w2.t());
        if let Some(mask) = &cache.mask1 {
            dh1 *= mask;
        }
        let dz1 = &dh1 * &cache.z1.mapv(gelu_derivative);

        let gw1 = cache.x.t().dot(&dz1);
        let gb1 = dz1.sum_axis(Axis(0));

        let dx = dz1.dot(&self.w1.t());
        let e = self.config.embed_dim;
        let mut gembed = Array2::zeros((self.config.alphabet_size, self.config.embed_dim));
        for (i, seq) in cache.batch.iter().enumerate() {
            for (pos, &sym) in seq.indices().iter().enumerate() {
                let mut row = gembed.row_mut(sym as usize);
                row += &dx.slice(ndarray::s![i, pos * e..(pos + 1) * e]);
            }
        }

        Ok(Gradients {
            embedding: gembed,
            w1: gw1,
            b1: gb1,
            w2: gw2,
            b2: gb2,
            w3: gw3,
            b3: gb3,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::Alphabet;

    fn tiny_config() -> MlpConfig {
        MlpConfig {
            alphabet_size: 4,
            seq_len: 3,
            embed_dim: 5,
            hidden1: 8,
            hidden2: 4,
            dropout: 0.0,
        }
    }

    fn tiny_batch(alphabet: &Alphabet) -> (Vec<Sequence>, Vec<f64>) {
        let texts = ["abc", "dda", "cab", "bbb", "adc", "ccd"];
        let labels = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let batch = texts
            .iter()
            .map(|t| Sequence::parse(t, alphabet).unwrap())
            .collect();
        (batch, labels.to_vec())
    }

    #[test]
    fn gelu_anchors() {
        assert_eq!(gelu(0.0), 0.0);
        assert!((gelu(10.0) - 10.0).abs() < 1e-6);
        // frozen from an independent high-precision normal-CDF evaluation
        assert!((gelu(1.0) - 0.8413447460685429).abs() < 1e-12);
        assert!((gelu(-0.5) - (-0.15426876936299345)).abs() < 1e-12);
        assert!((gelu(2.25) - 2.2224949365261494).abs() < 1e-12);
    }

    #[test]
    fn gelu_derivative_matches_finite_differences() {
        for &x in &[-3.0, -1.0, -0.1, 0.0, 0.4, 1.7, 4.2] {
            let h = 1e-6;
            let numeric = (gelu(x + h) - gelu(x - h)) / (2.0 * h);
            assert!(
                (gelu_derivative(x) - numeric).abs() < 1e-8,
                "gelu'({x}) mismatch: {} vs {numeric}",
                gelu_derivative(x)
            );
        }
    }

    #[test]
    fn bce_anchors() {
        assert!((bce_loss(0.5, 1.0) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((bce_loss(0.5, 0.0) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((bce_loss(0.9, 0.0) - 2.302585092994046).abs() < 1e-12);
        // p -> 1 with label 1 drives the loss to ~0 (clamp keeps it finite)
        assert!(bce_loss(1.0, 1.0) < 1e-6);
        assert!(bce_loss(0.0, 1.0).is_finite());
    }

    #[test]
    fn zero_model_outputs_exactly_half() {
        let model = MlpModel::zeros(tiny_config()).unwrap();
        let alphabet = Alphabet::lowercase_prefix(4).unwrap();
        let (batch, _) = tiny_batch(&alphabet);
        for p in model.predict_batch(&batch).unwrap() {
            assert_eq!(p, 0.5);
        }
    }

    #[test]
    fn inference_is_deterministic_and_in_open_interval() {
        let model = MlpModel::init(tiny_config(), 3).unwrap();
        let alphabet = Alphabet::lowercase_prefix(4).unwrap();
        let (batch, _) = tiny_batch(&alphabet);
        let a = model.predict_batch(&batch).unwrap();
        let b = model.predict_batch(&batch).unwrap();
        assert_eq!(a, b);
        for &p in &a {
            assert!(p > 0.0 && p < 1.0);
        }
        assert_eq!(
            model.predict_confidence(&batch[0]).unwrap(),
            a[0],
            "single-sequence path must agree with batched inference"
        );
    }

    #[test]
    fn forward_rejects_wrong_length() {
        let model = MlpModel::init(tiny_config(), 3).unwrap();
        let alphabet = Alphabet::lowercase_prefix(4).unwrap();
        let bad = Sequence::parse("abcd", &alphabet).unwrap();
        assert!(model.predict_batch(&[bad]).is_err());
    }

    #[test]
    fn dropout_zero_rate_and_statistics() {
        let mut config = tiny_config();
        config.hidden1 = 250;
        config.dropout = 0.1;
        let model = MlpModel::init(config, 5).unwrap();
        let mut rng = RngState::new(17);
        let activations = Array2::from_elem((400, 250), 1.0);
        let (dropped, mask) = model.apply_dropout(activations, Mode::Train, &mut rng);
        let mask = mask.expect("train mode must mask");
        let total = mask.len();
        let zeros = mask.iter().filter(|&&m| m == 0.0).count();
        let rate = zeros as f64 / total as f64;
        assert!(
            (rate - 0.1).abs() <= 0.01,
            "empirical drop rate {rate} outside 0.1 +- 0.01"
        );
        let scale = 1.0 / 0.9;
        for (&d, &m) in dropped.iter().zip(mask.iter()) {
            assert!(m == 0.0 || m == scale);
            assert!(d == 0.0 || (d - scale).abs() < 1e-15);
        }

        let mut rng2 = RngState::new(17);
        let (kept, no_mask) =
            model.apply_dropout(Array2::from_elem((4, 250), 2.0), Mode::Inference, &mut rng2);
        assert!(no_mask.is_none());
        assert!(kept.iter().all(|&v| v == 2.0));
    }

    #[test]
    fn backward_rejects_mode_mismatch() {
        let model = MlpModel::init(tiny_config(), 3).unwrap();
        let alphabet = Alphabet::lowercase_prefix(4).unwrap();
        let (batch, labels) = tiny_batch(&alphabet);
        let mut rng = RngState::new(1);
        let cache = model
            .forward_cached(&batch, Mode::Inference, &mut rng)
            .unwrap();
        assert!(matches!(
            model.backward(&cache, &labels, Mode::Train),
            Err(Error::ModeMismatch { .. })
        ));
    }

    /// Central finite differences over every parameter of a tiny model.
    fn finite_difference_check(dropout: f64, seed: u64) {
        let mut config = tiny_config();
        config.dropout = dropout;
        let model = MlpModel::init(config.clone(), 3).unwrap();
        let alphabet = Alphabet::lowercase_prefix(4).unwrap();
        let (batch, labels) = tiny_batch(&alphabet);

        // Masks depend only on the rng stream, so resetting the seed before
        // every evaluation makes the loss a deterministic function of the
        // parameters with the masks held fixed.
        let loss_of = |m: &MlpModel| -> f64 {
            let mut rng = RngState::new(seed);
            let cache = m.forward_cached(&batch, Mode::Train, &mut rng).unwrap();
            MlpModel::mean_loss(&cache, &labels)
        };

        let mut rng = RngState::new(seed);
        let cache = model.forward_cached(&batch, Mode::Train, &mut rng).unwrap();
        let grads = model.backward(&cache, &labels, Mode::Train).unwrap();

        let h = 1e-5;
        let mut checked = 0usize;
        let mut check = |name: &str,
                         analytic: &[f64],
                         read: &dyn Fn(&MlpModel) -> Vec<f64>,
                         write: &dyn Fn(&mut MlpModel, usize, f64)| {
            let baseline = read(&model);
            assert_eq!(baseline.len(), analytic.len());
            for i in 0..baseline.len() {
                let mut plus = model.clone();
                write(&mut plus, i, baseline[i] + h);
                let mut minus = model.clone();
                write(&mut minus, i, baseline[i] - h);
                let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
                let a = analytic[i];
                if a.abs() <= 1e-8 && numeric.abs() <= 1e-8 {
                    continue;
                }
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs());
                assert!(
                    rel < 1e-3,
                    "{name}[{i}]: analytic {a} vs numeric {numeric} (rel {rel})"
                );
                checked += 1;
            }
        };

        macro_rules! check_block2 {
            ($name:literal, $field:ident) => {
                check(
                    $name,
                    grads.$field.as_slice().unwrap(),
                    &|m: &MlpModel| m.$field.iter().copied().collect(),
                    &|m: &mut MlpModel, i: usize, v: f64| {
                        *m.$field.as_slice_mut().unwrap().get_mut(i).unwrap() = v
                    },
                );
            };
        }
        check_block2!("embedding", embedding);
        check_block2!("w1", w1);
        check_block2!("b1", b1);
        check_block2!("w2", w2);
        check_block2!("b2", b2);
        check_block2!("w3", w3);
        check_block2!("b3", b3);
        assert!(checked > 100, "only {checked} parameters had nonzero gradients");
    }

    #[test]
    fn gradients_match_finite_differences() {
        finite_difference_check(0.0, 42);
    }

    #[test]
    fn gradients_match_finite_differences_with_dropout() {
        finite_difference_check(0.25, 43);
    }

    #[test]
    fn untouched_embedding_rows_have_zero_gradient() {
        let model = MlpModel::init(tiny_config(), 9).unwrap();
        let alphabet = Alphabet::lowercase_prefix(4).unwrap();
        // symbol 'd' (index 3) never appears
        let batch = vec![
            Sequence::parse("abc", &alphabet).unwrap(),
            Sequence::parse("cba", &alphabet).unwrap(),
        ];
        let labels = vec![1.0, 0.0];
        let mut rng = RngState::new(2);
        let cache = model.forward_cached(&batch, Mode::Train, &mut rng).unwrap();
        let grads = model.backward(&cache, &labels, Mode::Train).unwrap();
        assert!(grads.embedding.row(3).iter().all(|&g| g == 0.0));
        assert!(grads.embedding.row(0).iter().any(|&g| g != 0.0));
    }

    #[test]
    fn mean_gradient_scales_with_batch_size() {
        // duplicating the batch must leave the mean gradient unchanged
        let model = MlpModel::init(tiny_config(), 4).unwrap();
        let alphabet = Alphabet::lowercase_prefix(4).unwrap();
        let (batch, labels) = tiny_batch(&alphabet);
        let mut rng = RngState::new(0);
        let cache = model.forward_cached(&batch, Mode::Inference, &mut rng).unwrap();
        let grads = model.backward(&cache, &labels, Mode::Inference).unwrap();

        let mut doubled = batch.clone();
        doubled.extend(batch.iter().cloned());
        let mut labels2 = labels.clone();
        labels2.extend(labels.iter().copied());
        let cache2 = model
            .forward_cached(&doubled, Mode::Inference, &mut rng)
            .unwrap();
        let grads2 = model.backward(&cache2, &labels2, Mode::Inference).unwrap();
        for (a, b) in grads.w1.iter().zip(grads2.w1.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
