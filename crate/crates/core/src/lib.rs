//! Computational laboratory for relative ergodic properties of C*-dynamical
//! systems.
//!
//! The crate covers five areas:
//!
//! * [`free_group`]: exact reduced-word arithmetic in free groups whose
//!   automorphism `T` is induced by a bijection of the symbols (cycles and
//!   integer shifts), with orbit classification.
//! * [`dual_system`]: the group algebra `C[Γ]` acting on finitely supported
//!   vectors of `ℓ²(Γ)`, the automorphism `α(λ(g)) = λ(Tg)`, the finite-orbit
//!   conditional expectation and vector/density states.
//! * [`averaging`]: averaging nets (weight families on `ℕ` and `ℝ`), Følner
//!   defects and the weighted mean ergodic theorem for matrix flows.
//! * [`mixing_lab`]: `(E,S)`-mixing diagnostics, multitime correlations,
//!   gap searches and Furstenberg / Bergelson averages on dual systems.
//! * [`finite_systems`] and [`joinings`]: finite-dimensional Markov systems,
//!   tensor products, and relative disjointness of finite classical systems.
//!
//! [`runner`] drives all of the above from JSON experiment configurations.

pub mod averaging;
pub mod dual_system;
pub mod error;
pub mod finite_systems;
pub mod free_group;
pub mod joinings;
pub mod mixing_lab;
pub mod runner;

pub use error::{Error, Result};
pub use num_complex::Complex64;
