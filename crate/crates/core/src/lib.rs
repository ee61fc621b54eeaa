//! Differentially-private subset retrieval and noisy group testing.
//!
//! The crate provides
//!
//! * [`combinatorics`]: subsets of a small ground set, the retrieval
//!   distance, sphere and ball enumeration, uniform samplers;
//! * [`mechanisms`]: randomized retrieval mechanisms with exact output
//!   distributions, plus clamp/resize post-processing;
//! * [`bounds`]: closed-form privacy bounds with regime checks;
//! * [`auditor`]: exact audited `delta` and accuracy failure for any
//!   mechanism or pooled testing function, and a Monte-Carlo estimator;
//! * [`grouptesting`]: pooling designs, noisy testing functions, the COMP
//!   decoder and a collector/lab simulation.
//!
//! ```
//! use dpsr_core::{audit_privacy, AuditOptions, Mechanism};
//! use num_rational::BigRational;
//!
//! let m = Mechanism::a1_ball(6, 2, 1).unwrap();
//! let one = BigRational::from_integer(1.into());
//! let report = audit_privacy(&m, &one, &AuditOptions::default()).unwrap();
//! assert_eq!(report.delta_star, BigRational::new(1.into(), 3.into()));
//! ```

pub mod auditor;
pub mod bounds;
pub mod combinatorics;
pub mod distribution;
pub mod error;
pub mod grouptesting;
pub mod mechanisms;

pub use auditor::{
    audit_accuracy, audit_privacy, audit_testing_privacy, delta_star, mc_estimate_delta,
    AccuracyReport, AuditOptions, AuditReport, ScanMode, ScanPolicy,
};
pub use bounds::{BoundReport, BoundSet, PrivacyParams};
pub use combinatorics::Subset;
pub use distribution::OutputDistribution;
pub use error::{Error, Result};
pub use grouptesting::{
    GroupTestingPipeline, NoiseRealization, NoiseSpec, PoolingDesign, Syndrome, UModel, UValue,
};
pub use mechanisms::{Mechanism, MechanismKind, SubsetMechanism};
