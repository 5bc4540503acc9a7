//! Streaming evaluation protocols.
//!
//! * class-incremental: all examples of one class, one class at a time;
//!   accuracy after each class on the test examples of classes seen so far
//!   (or on the full test set).
//! * example-incremental: the training set is split into stratified parts
//!   learned one after the other; accuracy on the full test set after each.
//! * one-shot: every example individually, classes mixed, in a seeded
//!   shuffled order.
//!
//! Every runner presents each training example to the learner exactly once.

mod learner;
mod report;
pub mod synth;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature::FeatureVector;

pub use learner::{
    CountingLearner, Example, Learner, Method, ModelParams, PrototypeLearner, TildaLearner,
};
pub use report::{parse_json_report, report_emit, ReportFormat, ScenarioReport, StageRow, COLUMNS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    ClassIncremental,
    ExampleIncremental,
    OneShot,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::ClassIncremental => "ci",
            Scenario::ExampleIncremental => "ei",
            Scenario::OneShot => "oneshot",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Scenario::ClassIncremental),
            "ei" => Ok(Scenario::ExampleIncremental),
            "oneshot" | "one-shot" => Ok(Scenario::OneShot),
            other => Err(Error::UnknownScenario(other.to_owned())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub method: Method,
    pub params: ModelParams,
    /// Number of example-incremental parts.
    pub parts: usize,
    /// Seed for presentation order.
    pub order_seed: u64,
    /// Class-incremental: evaluate on the full test set instead of the
    /// classes seen so far.
    pub full_test: bool,
    /// One-shot: also evaluate after every `n` examples.
    pub checkpoint_every: Option<usize>,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, method: Method) -> Self {
        ScenarioSpec {
            scenario,
            method,
            params: ModelParams::default(),
            parts: 10,
            order_seed: 0,
            full_test: false,
            checkpoint_every: None,
        }
    }
}

/// Fraction of `test` the learner labels correctly; 0 for an empty set.
pub fn accuracy(learner: &dyn Learner, test: &[&Example]) -> Result<f64> {
    if test.is_empty() {
        return Ok(0.0);
    }
    let correct = test
        .par_iter()
        .map(|e| learner.predict(e).map(|l| usize::from(l == e.label)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(correct as f64 / test.len() as f64)
}

fn check_inputs(train: &[Example], test: &[Example]) -> Result<usize> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptySplit);
    }
    Ok(train[0].dim())
}

/// Builds the learner named by `spec` and runs the scenario it names.
pub fn run_scenario(
    spec: &ScenarioSpec,
    train: &[Example],
    test: &[Example],
) -> Result<ScenarioReport> {
    let dim = check_inputs(train, test)?;
    let mut learner = spec.method.build(&spec.params, dim)?;
    run_scenario_with(spec, &mut learner, train, test)
}

/// Runs the scenario named by `spec` against a caller-supplied learner.
pub fn run_scenario_with(
    spec: &ScenarioSpec,
    learner: &mut dyn Learner,
    train: &[Example],
    test: &[Example],
) -> Result<ScenarioReport> {
    match spec.scenario {
        Scenario::ClassIncremental => class_incremental(spec, learner, train, test),
        Scenario::ExampleIncremental => example_incremental(spec, learner, train, test),
        Scenario::OneShot => one_shot(spec, learner, train, test),
    }
}

pub fn run_class_incremental(
    spec: &ScenarioSpec,
    train: &[Example],
    test: &[Example],
) -> Result<ScenarioReport> {
    run_scenario(
        &ScenarioSpec {
            scenario: Scenario::ClassIncremental,
            ..spec.clone()
        },
        train,
        test,
    )
}

pub fn run_example_incremental(
    spec: &ScenarioSpec,
    train: &[Example],
    test: &[Example],
) -> Result<ScenarioReport> {
    run_scenario(
        &ScenarioSpec {
            scenario: Scenario::ExampleIncremental,
            ..spec.clone()
        },
        train,
        test,
    )
}

pub fn run_one_shot(
    spec: &ScenarioSpec,
    train: &[Example],
    test: &[Example],
) -> Result<ScenarioReport> {
    run_scenario(
        &ScenarioSpec {
            scenario: Scenario::OneShot,
            ..spec.clone()
        },
        train,
        test,
    )
}

/// Groups example indices by label in first-seen order.
fn group_by_label(examples: &[Example]) -> Vec<(String, Vec<usize>)> {
    let mut order: Vec<(String, Vec<usize>)> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, e) in examples.iter().enumerate() {
        let slot = *index.entry(e.label.as_str()).or_insert_with(|| {
            order.push((e.label.clone(), Vec::new()));
            order.len() - 1
        });
        order[slot].1.push(i);
    }
    order
}

fn class_incremental(
    spec: &ScenarioSpec,
    learner: &mut dyn Learner,
    train: &[Example],
    test: &[Example],
) -> Result<ScenarioReport> {
    check_inputs(train, test)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.order_seed);
    let mut groups = group_by_label(train);
    groups.shuffle(&mut rng);

    let mut report = ScenarioReport::new(spec.scenario.name(), spec.method.name());
    let mut seen: HashSet<&str> = HashSet::new();
    let mut examples = 0;
    for (stage, (label, idx)) in groups.iter().enumerate() {
        for &i in idx {
            learner.learn(&train[i])?;
        }
        examples += idx.len();
        seen.insert(label);
        let subset: Vec<&Example> = test
            .iter()
            .filter(|e| spec.full_test || seen.contains(e.label.as_str()))
            .collect();
        report.push(StageRow {
            stage: stage + 1,
            classes: seen.len(),
            examples,
            accuracy: accuracy(learner, &subset)?,
            bytes: learner.model_bytes(),
        });
    }
    Ok(report)
}

/// Splits `examples` into `parts` stratified parts: every class appears in
/// every part, and part sizes differ by at most one.
pub fn stratified_parts(examples: &[Example], parts: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if parts == 0 {
        return Err(Error::InvalidConfig("parts must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Vec::new(); parts];
    let mut next = 0;
    for (label, mut idx) in group_by_label(examples) {
        if idx.len() < parts {
            return Err(Error::StratificationImpossible {
                label,
                count: idx.len(),
                parts,
            });
        }
        idx.shuffle(&mut rng);
        for i in idx {
            out[next % parts].push(i);
            next += 1;
        }
    }
    for part in &mut out {
        part.shuffle(&mut rng);
    }
    Ok(out)
}

fn example_incremental(
    spec: &ScenarioSpec,
    learner: &mut dyn Learner,
    train: &[Example],
    test: &[Example],
) -> Result<ScenarioReport> {
    check_inputs(train, test)?;
    let parts = stratified_parts(train, spec.parts, spec.order_seed)?;
    let everything: Vec<&Example> = test.iter().collect();
    let mut report = ScenarioReport::new(spec.scenario.name(), spec.method.name());
    let mut examples = 0;
    for (stage, part) in parts.iter().enumerate() {
        for &i in part {
            learner.learn(&train[i])?;
        }
        examples += part.len();
        report.push(StageRow {
            stage: stage + 1,
            classes: learner.num_classes(),
            examples,
            accuracy: accuracy(learner, &everything)?,
            bytes: learner.model_bytes(),
        });
    }
    Ok(report)
}

fn one_shot(
    spec: &ScenarioSpec,
    learner: &mut dyn Learner,
    train: &[Example],
    test: &[Example],
) -> Result<ScenarioReport> {
    check_inputs(train, test)?;
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.order_seed));
    let everything: Vec<&Example> = test.iter().collect();
    let mut report = ScenarioReport::new(spec.scenario.name(), spec.method.name());
    let every = spec.checkpoint_every.filter(|&n| n > 0);
    for (n, &i) in order.iter().enumerate() {
        learner.learn(&train[i])?;
        let done = n + 1;
        if done == order.len() || every.is_some_and(|e| done % e == 0) {
            report.push(StageRow {
                stage: report.rows.len() + 1,
                classes: learner.num_classes(),
                examples: done,
                accuracy: accuracy(learner, &everything)?,
                bytes: learner.model_bytes(),
            });
        }
    }
    Ok(report)
}

/// Pairs feature vectors with labels as unaugmented examples.
pub fn examples_from_pairs(pairs: Vec<(FeatureVector, String)>) -> Vec<Example> {
    pairs
        .into_iter()
        .map(|(x, l)| Example::plain(x, l))
        .collect()
}
