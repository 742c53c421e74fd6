//! Executes an [`OpMapping`] against a stand-in provider. Used by tests to
//! show that generated adapters are faithful bridges.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::generate::{OpMapping, ReturnAction, SlotAction};
use crate::analyser::{Conversion, ConversionRule};
use crate::spec_lang::{Literal, SemType};
use crate::Ratio;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InterpretError {
    /// A checked narrowing or scaling left the target range.
    Narrow { value: String, target: SemType },
    Parse { text: String, target: SemType },
    Type { value: String, expected: SemType },
    Arity { expected: usize, got: usize },
}

impl InterpretError {
    pub fn code(&self) -> &'static str {
        match self {
            InterpretError::Narrow { .. } => "E_NARROW",
            InterpretError::Parse { .. } => "E_PARSE_VALUE",
            InterpretError::Type { .. } => "E_TYPE",
            InterpretError::Arity { .. } => "E_ARITY",
        }
    }
}

impl fmt::Display for InterpretError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterpretError::Narrow { value, target } => {
                write!(f, "{}: {} does not fit {}", self.code(), value, target)
            }
            InterpretError::Parse { text, target } => {
                write!(f, "{}: cannot parse {:?} as {}", self.code(), text, target)
            }
            InterpretError::Type { value, expected } => {
                write!(f, "{}: {} is not a {}", self.code(), value, expected)
            }
            InterpretError::Arity { expected, got } => write!(
                f,
                "{}: expected {} argument(s), got {}",
                self.code(),
                expected,
                got
            ),
        }
    }
}

impl core::error::Error for InterpretError {}

fn narrow(value: &Literal, target: &SemType) -> InterpretError {
    InterpretError::Narrow {
        value: value.to_string(),
        target: target.clone(),
    }
}

fn int_in(v: i64, target: &SemType, original: &Literal) -> Result<Literal, InterpretError> {
    match target {
        SemType::I32 if i32::try_from(v).is_err() => Err(narrow(original, target)),
        _ => Ok(Literal::Int(v)),
    }
}

fn float_to_int(v: f64, target: &SemType, original: &Literal) -> Result<Literal, InterpretError> {
    // 2^63 as f64; the range check must happen before the cast
    const LIMIT: f64 = 9_223_372_036_854_775_808.0;
    if !v.is_finite() || v - (v as i64 as f64) != 0.0 || !(-LIMIT..LIMIT).contains(&v) {
        return Err(narrow(original, target));
    }
    int_in(v as i64, target, original)
}

fn scale(value: &Literal, target: &SemType, factor: Ratio) -> Result<Literal, InterpretError> {
    match (value, target) {
        (Literal::Float(v), SemType::F64) => Ok(Literal::Float(
            v * factor.numer() as f64 / factor.denom() as f64,
        )),
        (Literal::Int(v), SemType::I32 | SemType::I64) => {
            let scaled = (*v as i128) * factor.numer() as i128;
            let den = factor.denom() as i128;
            if scaled % den != 0 {
                return Err(narrow(value, target));
            }
            let q = i64::try_from(scaled / den).map_err(|_| narrow(value, target))?;
            int_in(q, target, value)
        }
        _ => Err(InterpretError::Type {
            value: value.to_string(),
            expected: target.clone(),
        }),
    }
}

fn apply_scalar(
    rule: &ConversionRule,
    value: &Literal,
    from: &SemType,
    to: &SemType,
) -> Result<Literal, InterpretError> {
    if !value.fits(from) {
        return Err(InterpretError::Type {
            value: value.to_string(),
            expected: from.clone(),
        });
    }
    match rule {
        ConversionRule::Widen => match (value, to) {
            (Literal::Int(v), SemType::I64) => Ok(Literal::Int(*v)),
            (Literal::Int(v), SemType::F64) => Ok(Literal::Float(*v as f64)),
            _ => Err(InterpretError::Type {
                value: value.to_string(),
                expected: from.clone(),
            }),
        },
        ConversionRule::NarrowChecked => match value {
            Literal::Int(v) => int_in(*v, to, value),
            Literal::Float(v) => float_to_int(*v, to, value),
            _ => Err(InterpretError::Type {
                value: value.to_string(),
                expected: from.clone(),
            }),
        },
        ConversionRule::UnitScale(factor) => scale(value, to, *factor),
        ConversionRule::Parse => {
            let text = match value {
                Literal::Str(s) => s,
                _ => unreachable!("fits(String) was checked"),
            };
            let fail = || InterpretError::Parse {
                text: text.clone(),
                target: to.clone(),
            };
            match to {
                SemType::I32 | SemType::I64 => {
                    let v: i64 = text.trim().parse().map_err(|_| fail())?;
                    int_in(v, to, value).map_err(|_| fail())
                }
                SemType::F64 => text
                    .trim()
                    .parse::<f64>()
                    .map(Literal::Float)
                    .map_err(|_| fail()),
                SemType::Bool => match text.trim() {
                    "true" => Ok(Literal::Bool(true)),
                    "false" => Ok(Literal::Bool(false)),
                    _ => Err(fail()),
                },
                _ => Err(fail()),
            }
        }
        ConversionRule::Format => Ok(Literal::Str(match value {
            Literal::Int(v) => v.to_string(),
            Literal::Float(v) => format!("{:?}", v),
            Literal::Bool(v) => v.to_string(),
            other => other.to_string(),
        })),
    }
}

fn apply_typed(
    rule: &ConversionRule,
    value: &Literal,
    from: &SemType,
    to: &SemType,
) -> Result<Literal, InterpretError> {
    match (from, to) {
        (SemType::List(fi), SemType::List(ti)) => match value {
            Literal::List(items) => items
                .iter()
                .map(|i| apply_typed(rule, i, fi, ti))
                .collect::<Result<Vec<_>, _>>()
                .map(Literal::List),
            _ => Err(InterpretError::Type {
                value: value.to_string(),
                expected: from.clone(),
            }),
        },
        _ => apply_scalar(rule, value, from, to),
    }
}

/// Applies one conversion; list types convert element-wise.
pub fn apply_conversion(conv: &Conversion, value: &Literal) -> Result<Literal, InterpretError> {
    apply_typed(&conv.rule, value, &conv.from.ty, &conv.to.ty)
}

/// Builds the provider's argument list from consumer arguments.
pub fn provider_args(mapping: &OpMapping, args: &[Literal]) -> Result<Vec<Literal>, InterpretError> {
    let expected = mapping
        .slots
        .iter()
        .filter(|s| !matches!(s, SlotAction::Fill(_)))
        .count();
    if args.len() != expected {
        return Err(InterpretError::Arity {
            expected,
            got: args.len(),
        });
    }
    mapping
        .slots
        .iter()
        .map(|s| match s {
            SlotAction::Take(i) => Ok(args[*i].clone()),
            SlotAction::Convert(i, c) => apply_conversion(c, &args[*i]),
            SlotAction::Fill(l) => Ok(l.clone()),
        })
        .collect()
}

/// Runs `mapping`: builds provider arguments, calls `provider`, and maps
/// the result back.
pub fn interpret_mapping<F>(
    mapping: &OpMapping,
    args: &[Literal],
    provider: F,
) -> Result<Literal, InterpretError>
where
    F: FnOnce(&[Literal]) -> Literal,
{
    let pargs = provider_args(mapping, args)?;
    let result = provider(&pargs);
    match &mapping.return_action {
        ReturnAction::Pass => Ok(result),
        ReturnAction::Convert(c) => apply_conversion(c, &result),
    }
}
