//! Cutoffs, densities, virial and interaction Morawetz quantities, and the
//! numerical identity checks built on them.

mod average;
mod cutoff;
mod density;
mod interaction;
mod suite;
mod virial;

pub use average::{
    morawetz_average, schedule, windowed_coercivity, windowed_coercivity_check, CoercivitySample, MorawetzRecorder, Schedule,
    WindowedCoercivityMonitor,
};
pub use cutoff::{build_cutoffs, chi, cutoff_property_suite, CutoffItem, CutoffProfile, CutoffReport};
pub use density::{boost_quantum, densities, gauge_transform, windowed, windowed_field, xi0, DensityTriple, Window, Windowed};
pub use interaction::{
    angular_identity_check, claim1_sign_check, claim2_invariance_check, interaction_morawetz_1d, morawetz_sup_over_r, projector,
    windowed_bilinear, SignCheck,
};
pub use virial::{resonance_term, virial, virial_identity_check, virial_sample, virial_tail, VirialRecorder, VirialReport, VirialSample};
pub use suite::{identity_suite, test_packet, IdentityReport, SuiteItem, SuiteOptions};
