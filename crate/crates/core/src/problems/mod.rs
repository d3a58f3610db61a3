//! The two benchmark families: minimal adversarial perturbations of a classifier and
//! quadratic-cost generator dispatch under a neural frequency surrogate.

mod adversarial;
mod dispatch;

pub use adversarial::{
    adversarial_for, build_adversarial, seeded_adversarial, seeded_classifier, AdversarialProblem,
    AdversarialSpec,
};
pub use dispatch::{
    build_dispatch, seeded_dispatch, seeded_dispatch_data, seeded_surrogate, DispatchData,
    DispatchProblem, DispatchSpec,
};
