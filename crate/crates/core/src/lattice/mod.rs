//! Dense intersection of graphs with emission matrices and the CTC and
//! MMI losses computed on the resulting lattices.

mod emissions;
mod intersect;
mod loss;

pub use emissions::DenseEmissions;
pub use intersect::{dense_intersect, BestPath, Lattice};
pub(crate) use intersect::{check_beam, check_labels};
pub use loss::{
    augment_emissions_for_compact, build_denominator, build_supervision, ctc_loss_and_grad,
    fold_augmented_grad, graph_loss_and_grad, mmi_loss_and_grad, topology_ctc_loss, topology_mmi_loss,
    LossResult,
};
