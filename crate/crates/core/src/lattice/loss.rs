use super::emissions::DenseEmissions;
use super::intersect::dense_intersect;
use crate::error::{Error, Result};
use crate::fst::{compose, connect, Arc, Label, Wfst};
use crate::pipeline::{build_ngram_fst, BigramLm};
use crate::semiring::Weight;
use crate::topology::{Topology, BLANK};

#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    /// `-ln` of the supervised path mass; `+inf` when nothing aligns.
    pub loss: f64,
    /// `∂loss/∂em`, same shape as the emissions.
    pub grad: DenseEmissions,
}

impl LossResult {
    fn unalignable(frames: usize, units: usize) -> Self {
        LossResult {
            loss: f64::INFINITY,
            grad: DenseEmissions::zeros(frames, units),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.loss.is_finite()
    }
}

/// Acceptor for exactly `target`, which may be empty.
fn target_acceptor(topo: &Wfst, target: &[Label]) -> Result<Wfst> {
    if let Some(position) = target.iter().position(|&u| u == BLANK) {
        return Err(Error::BlankInTarget { position });
    }
    let mut lin = Wfst::new();
    lin.add_states(target.len() + 1);
    lin.set_start(0);
    for (i, &u) in target.iter().enumerate() {
        lin.add_arc(i, Arc::new(u, u, Weight::ONE, i + 1));
    }
    lin.set_final(target.len(), Weight::ONE);
    let units = topo.output_symbols_shared();
    Ok(lin.with_symbols(units.clone(), units))
}

/// `topo ∘ linear(target)`, trimmed. Empty when the topology cannot
/// produce the target.
pub fn build_supervision(topo: &Wfst, target: &[Label]) -> Result<Wfst> {
    Ok(connect(&compose(topo, &target_acceptor(topo, target)?)?))
}

/// `topo ∘ G` for a unit-level bigram.
pub fn build_denominator(topo: &Wfst, unit_lm: &BigramLm) -> Result<Wfst> {
    let mut g = build_ngram_fst(unit_lm)?;
    g.set_input_symbols(topo.output_symbols_shared());
    g.set_output_symbols(topo.output_symbols_shared());
    Ok(connect(&compose(topo, &g)?))
}

/// Loss and gradient of an already-built supervision graph, optionally
/// pruning the intersection.
pub fn graph_loss_and_grad(supervision: &Wfst, em: &DenseEmissions, prune_beam: Option<f64>) -> Result<LossResult> {
    let lat = dense_intersect(supervision, em, prune_beam)?;
    if lat.is_empty() {
        return Ok(LossResult::unalignable(em.frames(), em.units()));
    }
    let loss = -lat.forward_score().value();
    let mut grad = lat.occupancy();
    for t in 0..grad.frames() {
        for v in grad.row_mut(t) {
            *v = -*v;
        }
    }
    Ok(LossResult { loss, grad })
}

pub fn ctc_loss_and_grad(topo: &Wfst, target: &[Label], em: &DenseEmissions) -> Result<LossResult> {
    graph_loss_and_grad(&build_supervision(topo, target)?, em, None)
}

/// Doubles the frame count: even rows carry the original scores with the
/// extra column at `-inf`, odd rows are all zero.
pub fn augment_emissions_for_compact(em: &DenseEmissions) -> DenseEmissions {
    let units = em.units() + 1;
    let mut out = DenseEmissions::zeros(2 * em.frames(), units);
    for t in 0..em.frames() {
        let row = out.row_mut(2 * t);
        row[..units - 1].copy_from_slice(em.row(t));
        row[units - 1] = f64::NEG_INFINITY;
    }
    out
}

/// Maps a gradient over augmented emissions back to the original ones.
/// Odd rows are constants and the extra column is pinned to `-inf`, so
/// only the leading columns of even rows carry gradient.
pub fn fold_augmented_grad(grad: &DenseEmissions) -> DenseEmissions {
    let units = grad.units() - 1;
    let frames = grad.frames() / 2;
    let mut out = DenseEmissions::zeros(frames, units);
    for t in 0..frames {
        out.row_mut(t).copy_from_slice(&grad.row(2 * t)[..units]);
    }
    out
}

/// CTC loss for a built topology. Train-mode compact topologies run on
/// frame-doubled emissions and the gradient is folded back.
pub fn topology_ctc_loss(topo: &Topology, target: &[Label], em: &DenseEmissions) -> Result<LossResult> {
    if topo.spec().uses_frame_doubling() {
        let aug = augment_emissions_for_compact(em);
        let r = ctc_loss_and_grad(topo.fst(), target, &aug)?;
        Ok(LossResult {
            loss: r.loss,
            grad: fold_augmented_grad(&r.grad),
        })
    } else {
        ctc_loss_and_grad(topo.fst(), target, em)
    }
}

/// `-(ln Z_num - ln Z_den)`. Only the denominator intersection is pruned.
pub fn mmi_loss_and_grad(
    numerator: &Wfst,
    denominator: &Wfst,
    em: &DenseEmissions,
    den_beam: Option<f64>,
) -> Result<LossResult> {
    let den = dense_intersect(denominator, em, den_beam)?;
    if den.is_empty() {
        return Err(Error::EmptyDenominator);
    }
    let num = dense_intersect(numerator, em, None)?;
    if num.is_empty() {
        return Ok(LossResult::unalignable(em.frames(), em.units()));
    }
    let loss = den.forward_score().value() - num.forward_score().value();
    let mut grad = den.occupancy();
    let num_occ = num.occupancy();
    for t in 0..grad.frames() {
        for (g, n) in grad.row_mut(t).iter_mut().zip(num_occ.row(t)) {
            *g -= n;
        }
    }
    Ok(LossResult { loss, grad })
}

/// MMI over a built topology and unit bigram, with frame doubling for
/// train-mode compact.
pub fn topology_mmi_loss(
    topo: &Topology,
    unit_lm: &BigramLm,
    target: &[Label],
    em: &DenseEmissions,
    den_beam: Option<f64>,
) -> Result<LossResult> {
    let num = build_supervision(topo.fst(), target)?;
    let den = build_denominator(topo.fst(), unit_lm)?;
    if topo.spec().uses_frame_doubling() {
        let r = mmi_loss_and_grad(&num, &den, &augment_emissions_for_compact(em), den_beam)?;
        Ok(LossResult {
            loss: r.loss,
            grad: fold_augmented_grad(&r.grad),
        })
    } else {
        mmi_loss_and_grad(&num, &den, em, den_beam)
    }
}
