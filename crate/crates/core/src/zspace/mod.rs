//! Membership and characterization engine for `Z(Ann(r, R))`.

mod engine;
mod geometry;
mod report;
mod support;

pub use engine::{
    characterize, euclidean_characterize, euclidean_membership_test, extract_coefficients, membership_test,
    sample_means, two_sided_characterize, Extraction,
};
pub use geometry::{admissible, admissible_pairs, norm, sample_centres, AnnulusSpec, GEOMETRY_MARGIN};
pub use report::{
    fit_verdict, mean_verdict, ChannelTable, FitRecord, MembershipReport, PairRecord, Verdict, MEMBER_TOL,
    NEGLIGIBLE, NON_MEMBER_TOL,
};
pub use support::{
    helgason_support_check, support_radius, RadiusRow, SupportJob, SupportReport, FLAG_DECAY_MISSING,
    FLAG_DECAY_VIOLATED, FLAG_NO_SUPPORT,
};
