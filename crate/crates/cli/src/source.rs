//! Where a directive sequence comes from: an orbit or an explicit branch word.

use clap::{Args, ValueEnum};
use num_rational::BigRational;

use sadic_core::coding::DirectiveView;
use sadic_core::mcf::{directive_sequence, Algorithm, Itinerary, SimplexPoint};
use sadic_core::Error;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Args, Debug)]
pub struct SourceArgs {
    #[arg(long, default_value = "cs")]
    pub algorithm: Algorithm,
    /// Starting point, e.g. `1/2,1/4,1/4`; the sequence is its itinerary.
    #[arg(long, conflicts_with = "blocks", required_unless_present = "blocks")]
    pub point: Option<String>,
    /// Explicit branch word, e.g. `1212` (cs) or `12,23,34,41` (brun).
    #[arg(long)]
    pub blocks: Option<String>,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
}

pub fn report_degeneracy<T>(it: &Itinerary<T>) {
    if let Some(k) = it.terminated_early {
        eprintln!("notice: orbit stopped at step {}: the map is undefined there", k);
    } else if let Some(k) = it.boundary_at {
        eprintln!("notice: orbit meets a simplex face or branch boundary at step {}", k);
    }
}

impl SourceArgs {
    /// The first `len` terms of the directive sequence.
    pub fn directive_view(&self, len: usize) -> Result<DirectiveView, Error> {
        let alg = self.algorithm;
        let prefix = match (&self.point, &self.blocks) {
            (Some(p), _) => {
                let x = SimplexPoint::<BigRational>::parse(p)?;
                let subs = match self.mode {
                    Mode::Exact => {
                        let it = directive_sequence(&x, len, alg)?;
                        report_degeneracy(&it);
                        it.substitutions
                    }
                    Mode::Float => {
                        let it = directive_sequence(&x.to_f64(), len, alg)?;
                        report_degeneracy(&it);
                        it.substitutions
                    }
                };
                if subs.len() < len {
                    return Err(Error::InvalidArgument(format!(
                        "the orbit yields {} terms, {} are needed",
                        subs.len(),
                        len
                    )));
                }
                subs
            }
            (None, Some(b)) => {
                let branches = alg.parse_branches(b)?;
                if branches.len() < len {
                    return Err(Error::InvalidArgument(format!(
                        "--blocks has {} terms, {} are needed",
                        branches.len(),
                        len
                    )));
                }
                branches.into_iter().map(|br| alg.substitution(br)).collect::<Result<Vec<_>, _>>()?
            }
            (None, None) => return Err(Error::InvalidArgument("one of --point or --blocks is required".into())),
        };
        DirectiveView::new(prefix, DirectiveView::generators_of(alg))
    }
}
