//! Brute-force reference for signature matching.
//!
//! Enumerates every injective assignment of consumer parameters to provider
//! slots without any concept-based pruning, then scores each one straight
//! from the penalty table. Shared by the core tests and the acceptance suite.

#![allow(dead_code)]

use adapterforge_core::analyser::{ConversionTable, Scoring, TypeUnit};
use adapterforge_core::spec_lang::OperationSig;
use adapterforge_core::Ratio;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleMatch {
    pub score: Ratio,
    /// Provider slot -> consumer parameter index, `None` for a filled slot.
    pub assignment: Vec<Option<usize>>,
    pub conversions: usize,
    pub fills: usize,
    pub permuted: bool,
}

fn assignments(m: usize, n: usize) -> Vec<Vec<usize>> {
    // every sequence of m distinct slots out of n: consumer i -> slot seq[i]
    fn rec(m: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for s in 0..n {
            if !cur.contains(&s) {
                cur.push(s);
                rec(m, n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if m <= n {
        rec(m, n, &mut Vec::new(), &mut out);
    }
    out
}

/// Best admissible alignment, or `None` when no assignment works or the best
/// score falls below the threshold.
pub fn oracle_match(
    required: &OperationSig,
    provided: &OperationSig,
    table: &ConversionTable,
    scoring: &Scoring,
) -> Option<OracleMatch> {
    let req_concept = required.concept.as_str();
    let prov_concept = provided.concept.as_str();
    let hops = if req_concept == prov_concept {
        0
    } else if prov_concept.starts_with(&format!("{}.", req_concept))
        || req_concept.starts_with(&format!("{}.", prov_concept))
    {
        let a = req_concept.split('.').count() as i64;
        let b = prov_concept.split('.').count() as i64;
        (a - b).unsigned_abs() as usize
    } else {
        return None;
    };

    let return_conversions = if required.returns == provided.returns {
        0
    } else if table
        .lookup(
            &TypeUnit::plain(provided.returns.clone()),
            &TypeUnit::plain(required.returns.clone()),
        )
        .is_some()
    {
        1
    } else {
        return None;
    };

    let concept_of = |op: &OperationSig, i: usize| -> String {
        let p = &op.params[i];
        match &p.concept {
            Some(c) => c.to_string(),
            None => format!("{}.arg.{}", op.concept, p.name.to_ascii_lowercase()),
        }
    };

    let m = required.params.len();
    let n = provided.params.len();
    let mut best: Option<OracleMatch> = None;
    'outer: for seq in assignments(m, n) {
        let mut conversions = return_conversions;
        for (ci, &slot) in seq.iter().enumerate() {
            if concept_of(required, ci) != concept_of(provided, slot) {
                continue 'outer;
            }
            let rp = &required.params[ci];
            let pp = &provided.params[slot];
            if rp.ty != pp.ty || rp.unit != pp.unit {
                let from = TypeUnit {
                    ty: rp.ty.clone(),
                    unit: rp.unit.clone(),
                };
                let to = TypeUnit {
                    ty: pp.ty.clone(),
                    unit: pp.unit.clone(),
                };
                if table.lookup(&from, &to).is_none() {
                    continue 'outer;
                }
                conversions += 1;
            }
        }
        let mut fills = 0;
        let mut assignment = vec![None; n];
        for (ci, &slot) in seq.iter().enumerate() {
            assignment[slot] = Some(ci);
        }
        for (slot, a) in assignment.iter().enumerate() {
            if a.is_none() {
                if provided.params[slot].default.is_none() {
                    continue 'outer;
                }
                fills += 1;
            }
        }
        let order: Vec<usize> = assignment.iter().flatten().copied().collect();
        let permuted = order.iter().enumerate().any(|(k, &c)| k != c);

        let mut score = Ratio::ONE;
        if required.name != provided.name {
            score = score - scoring.rename;
        }
        score = score - scoring.concept_hop.mul_int(hops as i64);
        if permuted {
            score = score - scoring.permutation;
        }
        score = score - scoring.conversion.mul_int(conversions as i64);
        score = score - scoring.default_fill.mul_int(fills as i64);

        let candidate = OracleMatch {
            score,
            assignment,
            conversions,
            fills,
            permuted,
        };
        best = match best {
            Some(b) if b.score >= candidate.score => Some(b),
            _ => Some(candidate),
        };
    }
    best.filter(|b| b.score >= scoring.threshold)
}
