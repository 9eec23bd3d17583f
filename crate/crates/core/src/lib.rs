//! Generalized orthogonal components regression (GOCRE) for generalized
//! linear models with far more predictors than observations.
//!
//! The crate is organised by concern:
//!
//! - [`family`]: link and variance functions (logit/Bernoulli, identity/Gaussian).
//! - [`engine`]: sequential component construction, coefficient recovery, prediction.
//! - [`firth`]: bias-corrected working responses and hat-matrix leverages.
//! - [`irpls`]: iteratively reweighted PLS baselines used for comparison.
//! - [`bench`]: the AR(1) simulation study, metrics and κ selection.
//! - [`io`]: CSV ingestion, model files and Wilcoxon feature ranking.
//! - [`cli`]: the `gocre` command-line tool.
//!
//! ```
//! use gocre::{fit, Dataset, FitConfig, LinkFamily};
//! use ndarray::{array, Array2};
//!
//! let x = Array2::from_shape_vec((6, 2), vec![
//!     0.1, 1.0, 0.4, -0.3, -1.2, 0.8, 2.0, 0.1, -0.7, -1.1, 0.9, 0.3,
//! ]).unwrap();
//! let y = array![0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
//! let data = Dataset::new(x, y).unwrap();
//! let model = fit(&data, &LinkFamily::logit(), &FitConfig::default().with_kappa_max(2)).unwrap();
//! let (_eta, prob) = model.predict(data.x.view()).unwrap();
//! assert!(prob.iter().all(|p| (0.0..=1.0).contains(p)));
//! ```

pub mod bench;
pub mod cli;
pub mod engine;
pub mod error;
pub mod family;
pub mod firth;
pub mod io;
pub mod irpls;

pub use bench::{run_benchmark, BenchmarkReport, Method, SimConfig};
pub use engine::{
    construct_component, deflate, fit, predict, recover_coefficients, weighted_center,
    ComponentRecord, ComponentStep, Dataset, FitConfig, FitDiagnostics, GocreModel, StopReason,
    WeightStrategy,
};
pub use error::{GocreError, Result};
pub use family::{FamilyKind, LinkFamily};
pub use firth::{BiasMode, LeverageMode, LeverageSpec};
pub use io::{load_csv, load_model, save_model, wilcoxon_rank_features, ModelFile, ResponseColumn};
pub use irpls::{irpls_dg_fit, irpls_m_fit, weighted_pls, IrplsConfig, IrplsResult};
