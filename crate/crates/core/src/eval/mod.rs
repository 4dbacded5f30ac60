//! Dice scoring and source-to-rest aggregation.

mod table;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::BinaryMask;
use crate::scalar::Confidence;

pub use table::{cross_domain_table, sweep_report, DiceTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("nothing to aggregate")]
    EmptyInput,
    #[error("scores mix source domains {0:?} and {1:?}")]
    MixedSourceDomains(String, String),
    #[error("no target domain differs from source {0:?}")]
    NoTargetDomains(String),
    #[error("dice {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("row {row:?} has columns {found:?}, expected {expected:?}")]
    InconsistentColumns {
        row: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("stored aggregates disagree with the case scores")]
    InconsistentReport,
}

/// `2|P∩G| / (|P| + |G|)`; two empty masks score 1.
pub fn dice<T: Confidence>(pred: &BinaryMask, gt: &BinaryMask) -> Result<T, EvalError> {
    if pred.dims() != gt.dims() {
        return Err(EvalError::DimensionMismatch {
            left: pred.dims(),
            right: gt.dims(),
        });
    }
    let (mut inter, mut total) = (0usize, 0usize);
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        inter += usize::from(p && g);
        total += usize::from(p) + usize::from(g);
    }
    if total == 0 {
        return Ok(T::one());
    }
    Ok(T::from_count(2 * inter) / T::from_count(total))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseScore<T> {
    pub case_id: String,
    pub source_domain: String,
    pub target_domain: String,
    pub dice: T,
}

/// Per-target-domain means plus the unweighted mean over target domains
/// other than the source ("A to Rest").
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiceReport<T> {
    source_domain: String,
    scores: Vec<CaseScore<T>>,
    per_domain_mean: BTreeMap<String, T>,
    source_to_rest: T,
}

impl<T: Confidence> DiceReport<T> {
    pub fn source_domain(&self) -> &str {
        &self.source_domain
    }

    pub fn scores(&self) -> &[CaseScore<T>] {
        &self.scores
    }

    pub fn per_domain_mean(&self) -> &BTreeMap<String, T> {
        &self.per_domain_mean
    }

    pub fn source_to_rest(&self) -> T {
        self.source_to_rest
    }

    /// Target domains that count towards the source-to-rest mean.
    pub fn rest_domains(&self) -> impl Iterator<Item = (&str, T)> {
        self.per_domain_mean
            .iter()
            .filter(|(d, _)| **d != self.source_domain)
            .map(|(d, &m)| (d.as_str(), m))
    }

    /// Single-row table: one column per rest domain, AVG = source-to-rest.
    pub fn table(&self) -> DiceTable<T> {
        let (columns, cells): (Vec<String>, Vec<T>) =
            self.rest_domains().map(|(d, m)| (d.to_owned(), m)).unzip();
        DiceTable::new(
            "Source",
            columns,
            vec![(format!("{} to Rest", self.source_domain), cells)],
        )
        .expect("single row is consistent")
    }
}

impl<'de, T> Deserialize<'de> for DiceReport<T>
where
    T: Confidence + Deserialize<'de>,
{
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "T: Deserialize<'de>")]
        struct Raw<T> {
            source_domain: String,
            scores: Vec<CaseScore<T>>,
            per_domain_mean: BTreeMap<String, T>,
            source_to_rest: T,
        }
        let raw = Raw::<T>::deserialize(de)?;
        let report = aggregate(raw.scores).map_err(serde::de::Error::custom)?;
        if report.source_domain != raw.source_domain
            || report.per_domain_mean != raw.per_domain_mean
            || report.source_to_rest != raw.source_to_rest
        {
            return Err(serde::de::Error::custom(EvalError::InconsistentReport));
        }
        Ok(report)
    }
}

/// Mean of values summed in ascending order, so the result does not depend
/// on input order.
fn order_free_mean<T: Confidence>(mut values: Vec<T>) -> T {
    values.sort_by(|a, b| a.partial_cmp(b).expect("scores are not NaN"));
    let n = T::from_count(values.len());
    values.into_iter().sum::<T>() / n
}

pub fn aggregate<T: Confidence>(scores: Vec<CaseScore<T>>) -> Result<DiceReport<T>, EvalError> {
    let first = scores.first().ok_or(EvalError::EmptyInput)?;
    let source = first.source_domain.clone();
    let mut by_domain: BTreeMap<String, Vec<T>> = BTreeMap::new();
    for s in &scores {
        if s.source_domain != source {
            return Err(EvalError::MixedSourceDomains(
                source,
                s.source_domain.clone(),
            ));
        }
        if !s.dice.is_unit() {
            return Err(EvalError::OutOfRange(s.dice.to_f64().unwrap_or(f64::NAN)));
        }
        by_domain
            .entry(s.target_domain.clone())
            .or_default()
            .push(s.dice);
    }
    let per_domain_mean: BTreeMap<String, T> = by_domain
        .into_iter()
        .map(|(d, v)| (d, order_free_mean(v)))
        .collect();
    let rest: Vec<T> = per_domain_mean
        .iter()
        .filter(|(d, _)| **d != source)
        .map(|(_, &m)| m)
        .collect();
    if rest.is_empty() {
        return Err(EvalError::NoTargetDomains(source));
    }
    let source_to_rest = order_free_mean(rest);
    Ok(DiceReport {
        source_domain: source,
        scores,
        per_domain_mean,
        source_to_rest,
    })
}
