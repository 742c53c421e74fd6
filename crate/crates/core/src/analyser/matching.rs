use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::conversion::{Conversion, ConversionTable, TypeUnit};
use super::scoring::Scoring;
use crate::spec_lang::{ConceptId, Literal, OperationSig, ParamSig};
use crate::Ratio;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MismatchKind {
    Rename,
    ParamPermutation,
    TypeConversion,
    DefaultFill,
    MissingOperation,
    ConceptDistance,
}

impl MismatchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MismatchKind::Rename => "RENAME",
            MismatchKind::ParamPermutation => "PARAM_PERMUTATION",
            MismatchKind::TypeConversion => "TYPE_CONVERSION",
            MismatchKind::DefaultFill => "DEFAULT_FILL",
            MismatchKind::MissingOperation => "MISSING_OPERATION",
            MismatchKind::ConceptDistance => "CONCEPT_DISTANCE",
        }
    }
}

impl fmt::Display for MismatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a conversion applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Slot {
    /// Provider parameter `provider`, fed from consumer parameter `consumer`.
    Param { provider: usize, consumer: usize },
    Return,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")
)]
pub enum Mismatch {
    Rename {
        required: String,
        provided: String,
    },
    /// `order[k]` is the consumer parameter feeding the k-th non-filled
    /// provider slot. Never the identity.
    ParamPermutation { order: Vec<usize> },
    TypeConversion { slot: Slot, conversion: Conversion },
    /// Provider slot filled with its declared default.
    DefaultFill { slot: usize, value: Literal },
    MissingOperation { concept: ConceptId },
    /// Always at least one hop.
    ConceptDistance { hops: usize },
}

impl Mismatch {
    pub fn kind(&self) -> MismatchKind {
        match self {
            Mismatch::Rename { .. } => MismatchKind::Rename,
            Mismatch::ParamPermutation { .. } => MismatchKind::ParamPermutation,
            Mismatch::TypeConversion { .. } => MismatchKind::TypeConversion,
            Mismatch::DefaultFill { .. } => MismatchKind::DefaultFill,
            Mismatch::MissingOperation { .. } => MismatchKind::MissingOperation,
            Mismatch::ConceptDistance { .. } => MismatchKind::ConceptDistance,
        }
    }

    /// Score deduction for this mismatch. Missing operations are not scored;
    /// they make a connection incompatible outright.
    pub fn penalty(&self, scoring: &Scoring) -> Ratio {
        match self {
            Mismatch::Rename { .. } => scoring.rename,
            Mismatch::ParamPermutation { .. } => scoring.permutation,
            Mismatch::TypeConversion { .. } => scoring.conversion,
            Mismatch::DefaultFill { .. } => scoring.default_fill,
            Mismatch::MissingOperation { .. } => Ratio::ZERO,
            Mismatch::ConceptDistance { hops } => scoring.concept_hop.mul_int(*hops as i64),
        }
    }
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mismatch::Rename { required, provided } => {
                write!(f, "RENAME {} -> {}", required, provided)
            }
            Mismatch::ParamPermutation { order } => {
                f.write_str("PARAM_PERMUTATION(")?;
                for (i, o) in order.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", o)?;
                }
                f.write_str(")")
            }
            Mismatch::TypeConversion { slot, conversion } => match slot {
                Slot::Param { provider, consumer } => write!(
                    f,
                    "TYPE_CONVERSION slot {} <- arg {}: {}",
                    provider, consumer, conversion
                ),
                Slot::Return => write!(f, "TYPE_CONVERSION return: {}", conversion),
            },
            Mismatch::DefaultFill { slot, value } => {
                write!(f, "DEFAULT_FILL slot {} = {}", slot, value)
            }
            Mismatch::MissingOperation { concept } => {
                write!(f, "MISSING_OPERATION {}", concept)
            }
            Mismatch::ConceptDistance { hops } => write!(f, "CONCEPT_DISTANCE {} hop(s)", hops),
        }
    }
}

/// A successful alignment of a required operation onto a provided one.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OperationMatch {
    pub required: String,
    pub provided: String,
    pub mismatches: Vec<Mismatch>,
    pub score: Ratio,
}

impl OperationMatch {
    pub fn is_exact(&self) -> bool {
        self.mismatches.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Choice {
    Take(usize, Option<Conversion>),
    Fill,
}

struct Search<'a> {
    candidates: Vec<Vec<(usize, Option<Conversion>)>>,
    provided: &'a [ParamSig],
    consumer_count: usize,
    scoring: &'a Scoring,
    best: Option<(Ratio, Vec<Choice>)>,
}

impl Search<'_> {
    fn cost(&self, choices: &[Choice]) -> Ratio {
        let mut cost = Ratio::ZERO;
        let mut order = Vec::new();
        for c in choices {
            match c {
                Choice::Take(i, conv) => {
                    order.push(*i);
                    if conv.is_some() {
                        cost = cost + self.scoring.conversion;
                    }
                }
                Choice::Fill => cost = cost + self.scoring.default_fill,
            }
        }
        if order.iter().enumerate().any(|(k, &i)| k != i) {
            cost = cost + self.scoring.permutation;
        }
        cost
    }

    fn run(&mut self, slot: usize, used: &mut Vec<bool>, taken: usize, choices: &mut Vec<Choice>) {
        let remaining_slots = self.provided.len() - slot;
        if self.consumer_count - taken > remaining_slots {
            return;
        }
        if slot == self.provided.len() {
            let cost = self.cost(choices);
            // strict improvement keeps the lexicographically first minimum
            if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
                self.best = Some((cost, choices.clone()));
            }
            return;
        }
        for k in 0..self.candidates[slot].len() {
            let (ci, conv) = self.candidates[slot][k].clone();
            if used[ci] {
                continue;
            }
            used[ci] = true;
            choices.push(Choice::Take(ci, conv));
            self.run(slot + 1, used, taken + 1, choices);
            choices.pop();
            used[ci] = false;
        }
        if self.provided[slot].default.is_some() {
            choices.push(Choice::Fill);
            self.run(slot + 1, used, taken, choices);
            choices.pop();
        }
    }
}

fn type_unit(p: &ParamSig) -> TypeUnit {
    TypeUnit {
        ty: p.ty.clone(),
        unit: p.unit.clone(),
    }
}

/// Aligns `required` (the consumer's view) onto `provided`.
///
/// Candidacy is decided by operation concept (equal, ancestor or
/// descendant). Parameters are paired by their effective concept; each pair
/// must have equal type and unit or a conversion table entry from the
/// consumer's representation to the provider's. Provider parameters left
/// over must carry defaults. Among admissible alignments the cheapest wins,
/// ties going to the lexicographically smallest slot assignment.
pub fn match_operation(
    required: &OperationSig,
    provided: &OperationSig,
    table: &ConversionTable,
    scoring: &Scoring,
) -> Option<OperationMatch> {
    let hops = required.concept.hops_to(&provided.concept)?;

    let return_conversion = if required.returns == provided.returns {
        None
    } else {
        Some(table.lookup(
            &TypeUnit::plain(provided.returns.clone()),
            &TypeUnit::plain(required.returns.clone()),
        )?)
    };

    let req_concepts = required.param_concepts();
    let prov_concepts = provided.param_concepts();
    let mut candidates = Vec::with_capacity(provided.params.len());
    for (slot, pp) in provided.params.iter().enumerate() {
        let mut list = Vec::new();
        for (ci, rp) in required.params.iter().enumerate() {
            if req_concepts[ci] != prov_concepts[slot] {
                continue;
            }
            let (from, to) = (type_unit(rp), type_unit(pp));
            if from == to {
                list.push((ci, None));
            } else if let Some(conv) = table.lookup(&from, &to) {
                list.push((ci, Some(conv)));
            }
        }
        candidates.push(list);
    }
    // a consumer parameter nobody can take makes the pair unmatchable
    for ci in 0..required.params.len() {
        if !candidates.iter().any(|l| l.iter().any(|(c, _)| *c == ci)) {
            return None;
        }
    }

    let mut search = Search {
        candidates,
        provided: &provided.params,
        consumer_count: required.params.len(),
        scoring,
        best: None,
    };
    search.run(
        0,
        &mut vec![false; required.params.len()],
        0,
        &mut Vec::new(),
    );
    let (_, choices) = search.best?;

    let mut mismatches = Vec::new();
    let mut score = Ratio::ONE;
    if required.name != provided.name {
        mismatches.push(Mismatch::Rename {
            required: required.name.clone(),
            provided: provided.name.clone(),
        });
    }
    if hops > 0 {
        mismatches.push(Mismatch::ConceptDistance { hops });
    }
    let order: Vec<usize> = choices
        .iter()
        .filter_map(|c| match c {
            Choice::Take(i, _) => Some(*i),
            Choice::Fill => None,
        })
        .collect();
    if order.iter().enumerate().any(|(k, &i)| k != i) {
        mismatches.push(Mismatch::ParamPermutation { order });
    }
    for (slot, c) in choices.iter().enumerate() {
        if let Choice::Take(ci, Some(conv)) = c {
            mismatches.push(Mismatch::TypeConversion {
                slot: Slot::Param {
                    provider: slot,
                    consumer: *ci,
                },
                conversion: conv.clone(),
            });
        }
    }
    if let Some(conv) = return_conversion {
        mismatches.push(Mismatch::TypeConversion {
            slot: Slot::Return,
            conversion: conv,
        });
    }
    for (slot, c) in choices.iter().enumerate() {
        if *c == Choice::Fill {
            // Fill is only chosen for slots with a default
            let value = provided.params[slot].default.clone().unwrap_or(Literal::Unit);
            mismatches.push(Mismatch::DefaultFill { slot, value });
        }
    }
    for m in &mismatches {
        score = score - m.penalty(scoring);
    }
    if score < scoring.threshold {
        return None;
    }
    Some(OperationMatch {
        required: required.name.clone(),
        provided: provided.name.clone(),
        mismatches,
        score,
    })
}
