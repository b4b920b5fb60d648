use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::realize::{extend_over, require_trivial_r, richness_deficit_cached, Deficit, Level, TemplateCache};
use super::template::ExtensionTemplate;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::predim::PredimensionSpec;
use crate::structures::{Embedding, PreStructure, StructureFile};

/// How far past the round-robin position the seeded choice may jump.
const PERTURBATION: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub steps: usize,
    pub size_cap: usize,
    pub level: Level,
    pub seed: u64,
}

/// One schedule position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Start,
    FreePoint {
        label: String,
    },
    Realize {
        anchor: Vec<String>,
        template: String,
        id: String,
        hash: String,
        new: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub step: usize,
    pub action: Action,
    pub structure: StructureFile,
    /// Label map from the previous stage into this one.
    pub embedding: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub step: usize,
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// A chain of stages with strong consecutive embeddings and the logs of
/// applied and skipped schedule actions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildTrace {
    pub spec: String,
    pub config: BuildConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<crate::collapse::MuFunction>,
    pub stages: Vec<Stage>,
    pub realized: Vec<LogEntry>,
    pub skipped: Vec<LogEntry>,
}

impl BuildTrace {
    pub(crate) fn new(spec: &PredimensionSpec, config: BuildConfig, start: &PreStructure) -> Self {
        BuildTrace {
            spec: spec.to_string(),
            config,
            mu: None,
            stages: vec![Stage {
                step: 0,
                action: Action::Start,
                structure: start.to_file(),
                embedding: BTreeMap::new(),
            }],
            realized: Vec::new(),
            skipped: Vec::new(),
        }
    }

    pub(crate) fn push_stage(&mut self, step: usize, action: Action, m: &PreStructure) {
        let prev = &self.stages.last().expect("start stage").structure;
        let embedding = prev.points.iter().map(|l| (l.clone(), l.clone())).collect();
        self.stages.push(Stage { step, action, structure: m.to_file(), embedding });
    }

    pub fn structure(&self, i: usize) -> Result<PreStructure> {
        PreStructure::from_file(&self.stages[i].structure)
    }

    pub fn structures(&self) -> Result<Vec<PreStructure>> {
        (0..self.stages.len()).map(|i| self.structure(i)).collect()
    }

    pub fn last(&self) -> Result<PreStructure> {
        self.structure(self.stages.len() - 1)
    }

    /// Embedding of stage `i − 1` into stage `i`.
    pub fn embedding(&self, i: usize, prev: &PreStructure, cur: &PreStructure) -> Result<Embedding> {
        Embedding::from_label_map(prev, cur, &self.stages[i].embedding)
    }

    /// The schedule: every action after the start, applied or not, by step.
    pub fn schedule(&self) -> Vec<(usize, Action)> {
        let mut all: Vec<(usize, Action)> = self
            .realized
            .iter()
            .chain(&self.skipped)
            .map(|e| (e.step, e.action.clone()))
            .collect();
        all.sort_by_key(|(s, _)| *s);
        all
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("trace serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn realize_action(m: &PreStructure, d: &Deficit, labels: Vec<String>) -> Action {
    Action::Realize {
        anchor: d.anchor.iter().map(|&x| m.label(x).to_string()).collect(),
        template: d.template.code(),
        id: d.template.id(),
        hash: d.template.hash(),
        new: labels,
    }
}

/// Applies `action` to `m` by labels. Errors when the anchor is absent.
pub(crate) fn apply_action(m: &PreStructure, action: &Action) -> Result<PreStructure> {
    match action {
        Action::Start => Ok(m.clone()),
        Action::FreePoint { label } => {
            let t = ExtensionTemplate::new(0, 1, [])?;
            extend_over(m, &[], &t, std::slice::from_ref(label))
        }
        Action::Realize { anchor, template, new, .. } => {
            let t = ExtensionTemplate::from_code(template)?;
            let idx = anchor
                .iter()
                .map(|l| m.index_of(l).ok_or_else(|| Error::Domain(format!("anchor point '{l}' absent"))))
                .collect::<Result<Vec<_>>>()?;
            extend_over(m, &idx, &t, new)
        }
    }
}

/// Approximates the generic structure: odd steps adjoin a free point, even
/// steps realize an unrealized (anchor, template) pair chosen round-robin
/// over the canonical deficit order with a seeded jump. A realization step
/// with nothing that fits under the size cap adjoins a free point instead.
pub fn generic_build(spec: &PredimensionSpec, config: BuildConfig, budget: &Budget) -> Result<BuildTrace> {
    require_trivial_r(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cache = TemplateCache::default();
    let mut m = PreStructure::empty();
    let mut trace = BuildTrace::new(spec, config, &m);
    let mut next_label = 0usize;
    let mut cursor: Option<(String, Vec<String>)> = None;
    let mut fresh = |m: &PreStructure| {
        let l = m.fresh_label("p", next_label);
        next_label = l[1..].parse::<usize>().expect("numeric suffix") + 1;
        l
    };

    for step in 1..=config.steps {
        budget.check_time()?;
        if m.n() >= config.size_cap {
            break;
        }
        let room = config.size_cap - m.n();
        let mut action = None;
        if step % 2 == 0 {
            let deficit: Vec<Deficit> = richness_deficit_cached(spec, &m, config.level, budget, &mut cache)?
                .into_iter()
                .filter(|d| d.template.new_points() <= room)
                .collect();
            if !deficit.is_empty() {
                let key = |d: &Deficit| (d.template.code(), d.anchor.iter().map(|&x| m.label(x).to_string()).collect::<Vec<_>>());
                let start = match &cursor {
                    None => 0,
                    Some(c) => deficit.iter().position(|d| key(d) > *c).unwrap_or(0),
                };
                let i = (start + rng.gen_range(0..=PERTURBATION)) % deficit.len();
                let chosen = &deficit[i];
                cursor = Some(key(chosen));
                let mut probe = m.clone();
                let mut labels = Vec::new();
                for _ in 0..chosen.template.new_points() {
                    let l = fresh(&probe);
                    probe.push_point(l.clone());
                    labels.push(l);
                }
                action = Some(realize_action(&m, chosen, labels));
            }
        }
        let action = action.unwrap_or_else(|| Action::FreePoint { label: fresh(&m) });
        m = apply_action(&m, &action)?;
        trace.realized.push(LogEntry { step, action: action.clone(), reason: None });
        trace.push_stage(step, action, &m);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predim::{is_strong_embedding, GsOutcome, Predim};

    fn cfg(steps: usize, cap: usize, k: usize, seed: u64) -> BuildConfig {
        BuildConfig { steps, size_cap: cap, level: Level::new(k), seed }
    }

    #[test]
    fn one_step_is_a_free_point() {
        let t = generic_build(&PredimensionSpec::TrivialR, cfg(1, 10, 2, 0), &Budget::default()).unwrap();
        assert_eq!(t.stages.len(), 2);
        let m = t.last().unwrap();
        assert_eq!(m.n(), 1);
        assert!(m.triples().is_empty());
    }

    #[test]
    fn deterministic_and_strong() {
        let spec = PredimensionSpec::TrivialR;
        let b = Budget::default();
        let a = generic_build(&spec, cfg(16, 10, 2, 7), &b).unwrap();
        let c = generic_build(&spec, cfg(16, 10, 2, 7), &b).unwrap();
        assert_eq!(a.to_json(), c.to_json());
        let ms = a.structures().unwrap();
        for i in 1..ms.len() {
            let e = a.embedding(i, &ms[i - 1], &ms[i]).unwrap();
            assert!(is_strong_embedding(&spec, &ms[i - 1], &ms[i], &e, &b).unwrap());
            let pd = Predim::new(&spec, &ms[i]).unwrap();
            assert_eq!(pd.gs_check().unwrap(), GsOutcome::Ok);
            assert!(ms[i].n() <= 10);
        }
        assert!(a.skipped.is_empty());
        assert_eq!(a.schedule().len(), a.stages.len() - 1);
    }

    #[test]
    fn trace_round_trips() {
        let t = generic_build(&PredimensionSpec::TrivialR, cfg(8, 10, 2, 3), &Budget::default()).unwrap();
        let text = t.to_json();
        let back = BuildTrace::from_json(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn other_presets_are_rejected() {
        let spec: PredimensionSpec = "field_r:d".parse().unwrap();
        assert!(generic_build(&spec, cfg(2, 4, 1, 0), &Budget::default()).is_err());
    }
}
