//! Condition-number driven low-rank regularization for small neural
//! networks.
//!
//! * [`linalg`]: Jacobi SVD, truncated low-rank factorization, matrix and
//!   layer condition numbers, kernel slicing.
//! * [`net`]: dense / conv feed-forward networks with manual backprop.
//! * [`regula`]: overfitting detection, normalized condition numbers,
//!   DLR substitution and ALR Tikhonov training with damping sequences.
//! * [`oracle`]: verification experiments for the recovery, rank and
//!   lazy-weight results.
//! * [`exp`]: datasets, experiment configs, seeded runs, metric CSVs and
//!   comparison tables.

pub mod exp;
pub mod linalg;
pub mod net;
pub mod oracle;
pub mod regula;
pub mod seed;
