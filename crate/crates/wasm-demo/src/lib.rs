//! Browser demo of the spoofing benchmark.
//!
//! Three interactive operations, all on a micro-scale landscape that trains
//! in the page within a second or two:
//!
//! 1. `train(seed)` — sample a synthetic replicator landscape, train the
//!    classifier, return loss/accuracy curves and test metrics.
//! 2. `spoof(start, seed)` — one greedy confidence climb against the trained
//!    model, returning every query plus an SVG confidence chart.
//! 3. `campaign(replicates, budget, seed)` — a grid of climbs, returning the
//!    endpoint verification summary, Hamming histogram SVG, and the
//!    positional-frequency heatmap pair.
//!
//! The heavy lifting lives in `DemoCore`, which is plain Rust (tested on the
//! host); the `#[wasm_bindgen]` wrapper only shuttles JSON strings.

use serde::Serialize;
use spoofbench_core::analysis::{
    confidence_by_query, default_checkpoints, hamming_histogram, positional_frequency,
    endpoint_frequency, grouped_bar_chart, heatmap_pair, line_chart, Series,
};
use spoofbench_core::landscape::ReplicatorSet;
use spoofbench_core::neural::{MlpModel, TrainerState};
use spoofbench_core::pipeline::{build_landscape, ExperimentConfig};
use spoofbench_core::seq::{derive_seed, RngState, SeedDomain, Sequence};
use spoofbench_core::spoof::{
    run_campaign, spoof_run, verify_endpoints, RunLabel, SpoofConfig, StartKind,
};
use spoofbench_core::training::{build_splits, evaluate, train_model};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct TrainOutput {
    landscape_count: usize,
    landscape_fraction: f64,
    alphabet: String,
    sequence_len: usize,
    curves: Vec<spoofbench_core::training::EpochStats>,
    test: spoofbench_core::training::EvalMetrics,
}

#[derive(Serialize)]
struct SpoofStep {
    query: u32,
    sequence: String,
    confidence: f64,
    accepted: bool,
}

#[derive(Serialize)]
struct SpoofOutput {
    start: String,
    final_sequence: String,
    final_confidence: f64,
    final_is_replicator: bool,
    nearest_replicator_distance: usize,
    accepted_count: usize,
    steps: Vec<SpoofStep>,
    svg: String,
}

#[derive(Serialize)]
struct CampaignOutput {
    runs: usize,
    reached_high_confidence: usize,
    replicator_endpoints: usize,
    false_attractor_rate: f64,
    mean_confidence_table: Vec<(u32, f64, f64)>,
    top_endpoints: Vec<(String, u32)>,
    confidence_svg: String,
    hamming_svg: String,
    positional_svg: String,
}

/// Model + landscape, the state behind the page.
struct DemoCore {
    config: ExperimentConfig,
    set: ReplicatorSet,
    model: MlpModel,
}

impl DemoCore {
    fn train(seed: u64) -> Result<(DemoCore, TrainOutput), spoofbench_core::Error> {
        let config = ExperimentConfig::micro(seed);
        let seeds = config.derived_seeds();
        let set = build_landscape(&config.landscape, seeds.landscape)?;
        let splits = build_splits(&set, &mut RngState::new(seeds.splits))?;
        let mut model = MlpModel::init(config.mlp_config(), seeds.model_init)?;
        let mut trainer = TrainerState::new(&model.config, config.adamw_params());
        let curves = train_model(
            &mut model,
            &splits,
            &mut trainer,
            &mut RngState::new(seeds.training),
            config.train_settings(),
        )?;
        let test = evaluate(&model, &splits.test, 0.5)?;
        let output = TrainOutput {
            landscape_count: set.count(),
            landscape_fraction: set.fraction(),
            alphabet: set.alphabet().symbols().iter().collect(),
            sequence_len: set.sequence_len(),
            curves,
            test,
        };
        Ok((DemoCore { config, set, model }, output))
    }

    fn spoof(&self, start_text: &str, seed: u64) -> Result<SpoofOutput, spoofbench_core::Error> {
        let alphabet = self.set.alphabet();
        let mut rng = RngState::new(derive_seed(seed, SeedDomain::Campaign, 0));
        let (start, kind) = if start_text == "random" {
            loop {
                let candidate = spoofbench_core::seq::random_sequence(
                    alphabet,
                    self.set.sequence_len(),
                    &mut rng,
                );
                if !self.set.is_replicator(&candidate)? {
                    break (candidate, StartKind::Random);
                }
            }
        } else {
            (Sequence::parse(start_text, alphabet)?, StartKind::Uniform)
        };
        let budget = self.config.spoof.query_budget;
        let trajectory = spoof_run(
            &self.model,
            alphabet,
            start.clone(),
            budget,
            &mut rng,
            RunLabel {
                run_id: "demo".into(),
                replicate: 0,
                start_kind: kind,
            },
        )?;

        let accepted: Vec<(f64, f64)> = trajectory
            .steps
            .iter()
            .filter(|s| s.accepted)
            .map(|s| (s.query as f64, s.confidence))
            .collect();
        let all: Vec<(f64, f64)> = trajectory
            .steps
            .iter()
            .map(|s| (s.query as f64, s.confidence))
            .collect();
        let svg = line_chart(
            "Confidence of the evolving sequence",
            "model queries",
            "confidence",
            &[
                Series { name: "proposals", points: all },
                Series { name: "accepted (current sequence)", points: accepted },
            ],
        );

        Ok(SpoofOutput {
            start: start.render(alphabet),
            final_sequence: trajectory.final_sequence.render(alphabet),
            final_confidence: trajectory.final_confidence,
            final_is_replicator: self.set.is_replicator(&trajectory.final_sequence)?,
            nearest_replicator_distance: self
                .set
                .nearest_hamming_distance(&trajectory.final_sequence)?,
            accepted_count: trajectory.steps.iter().filter(|s| s.accepted).count() - 1,
            steps: trajectory
                .steps
                .iter()
                .map(|s| SpoofStep {
                    query: s.query,
                    sequence: s.sequence.render(alphabet),
                    confidence: s.confidence,
                    accepted: s.accepted,
                })
                .collect(),
            svg,
        })
    }

    fn campaign(
        &self,
        replicates: u32,
        budget: u32,
        seed: u64,
    ) -> Result<CampaignOutput, spoofbench_core::Error> {
        let config = SpoofConfig {
            query_budget: budget,
            replicates,
        };
        let trajectories = run_campaign(&self.model, &self.set, &config, seed)?;
        let verification = verify_endpoints(&self.set, &trajectories)?;
        let alphabet = self.set.alphabet();

        let table = confidence_by_query(&trajectories, &default_checkpoints(budget))?;
        let confidence_svg = line_chart(
            &format!("Mean confidence over {replicates} replicates"),
            "model queries",
            "mean confidence",
            &[
                Series {
                    name: "uniform starts",
                    points: table
                        .checkpoints
                        .iter()
                        .zip(&table.uniform_mean)
                        .map(|(&q, &m)| (q as f64, m))
                        .collect(),
                },
                Series {
                    name: "random starts",
                    points: table
                        .checkpoints
                        .iter()
                        .zip(&table.random_mean)
                        .map(|(&q, &m)| (q as f64, m))
                        .collect(),
                },
            ],
        );

        let histogram = hamming_histogram(&trajectories, &self.set)?;
        let buckets: Vec<u32> = (0..histogram.uniform.len() as u32).collect();
        let hamming_svg = grouped_bar_chart(
            "Endpoint distance to nearest true replicator",
            "Hamming distance",
            "runs",
            &buckets,
            &[
                ("uniform starts", histogram.uniform.as_slice()),
                ("random starts", histogram.random.as_slice()),
            ],
        );

        let members: Vec<&Sequence> = self.set.members().iter().collect();
        let endpoints: Vec<&Sequence> = trajectories.iter().map(|t| &t.final_sequence).collect();
        let positional_svg = heatmap_pair(
            "Symbol frequency by position",
            alphabet.symbols(),
            "true replicators",
            &positional_frequency(&members, alphabet, "true-replicators")?.rows,
            "spoof endpoints",
            &positional_frequency(&endpoints, alphabet, "spoof-endpoints")?.rows,
        );

        let endpoint_stats = endpoint_frequency(&trajectories, alphabet);
        let mut top: Vec<(String, u32)> = endpoint_stats
            .uniform
            .into_iter()
            .chain(endpoint_stats.random)
            .collect();
        top.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        top.truncate(8);

        Ok(CampaignOutput {
            runs: trajectories.len(),
            reached_high_confidence: trajectories
                .iter()
                .filter(|t| t.final_confidence >= 0.999)
                .count(),
            replicator_endpoints: verification.replicator_endpoints,
            false_attractor_rate: verification.false_attractor_rate,
            mean_confidence_table: table
                .checkpoints
                .iter()
                .enumerate()
                .map(|(i, &q)| (q, table.random_mean[i], table.uniform_mean[i]))
                .collect(),
            top_endpoints: top,
            confidence_svg,
            hamming_svg,
            positional_svg,
        })
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, JsValue> {
    serde_json::to_string(value).map_err(|e| JsValue::from_str(&e.to_string()))
}

fn to_js_err(e: spoofbench_core::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Page-facing handle: train once, then spoof and run campaigns against the
/// same model.
#[wasm_bindgen]
pub struct DemoSession {
    core: DemoCore,
}

#[wasm_bindgen]
impl DemoSession {
    /// Build the landscape and train the classifier. Returns the training
    /// curves and test metrics as JSON.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> Result<DemoSession, JsValue> {
        let (core, _) = DemoCore::train(seed as u64).map_err(to_js_err)?;
        Ok(DemoSession { core })
    }

    /// Like `new`, but also returns the training summary JSON. JS cannot get
    /// two values from a constructor, so pages call this first and keep the
    /// session.
    pub fn train_summary(seed: u32) -> Result<String, JsValue> {
        let (_, output) = DemoCore::train(seed as u64).map_err(to_js_err)?;
        to_json(&output)
    }

    /// One greedy climb. `start` is either a sequence over the demo alphabet
    /// (e.g. "aaaaaaa") or the word "random".
    pub fn spoof(&self, start: &str, seed: u32) -> Result<String, JsValue> {
        to_json(&self.core.spoof(start, seed as u64).map_err(to_js_err)?)
    }

    /// A grid of `replicates x (K uniform + K random)` climbs.
    pub fn campaign(&self, replicates: u32, budget: u32, seed: u32) -> Result<String, JsValue> {
        to_json(
            &self
                .core
                .campaign(replicates, budget, seed as u64)
                .map_err(to_js_err)?,
        )
    }

    /// The demo alphabet as one string, for building start-sequence pickers.
    pub fn alphabet(&self) -> String {
        self.core.set.alphabet().symbols().iter().collect()
    }

    pub fn sequence_len(&self) -> usize {
        self.core.set.sequence_len()
    }
}
