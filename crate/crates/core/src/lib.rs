//! Enumeration, filtering and classification of polynomial endomorphisms of
//! `F_q^n` for small `q` and `n = 3`.
//!
//! The crate is layered bottom-up:
//!
//! * [`ff`]: table-driven arithmetic in `F_{p^r}` and univariate polynomials.
//! * [`mpoly`]: formal multivariate polynomials on a dense graded basis.
//! * [`polymap`]: polynomial maps, Jacobians, bijectivity, formal inversion
//!   and the predicate vocabulary (automorphism, mock automorphism, ...).
//! * [`orbits`]: `GL_n`/`Aff_n` enumeration, conjugation canonical forms and
//!   tame-equivalence closure.
//! * [`lfpe`]: locally finite automorphisms, minimal polynomials, censuses.
//! * [`scan`]: sharded, resumable exhaustive scans of coefficient spaces.
//! * [`report`]: CSV and aligned-text tables.
//!
//! Data-parallel loops run on rayon when the default `parallel` feature is
//! enabled and fall back to sequential iteration otherwise.

pub mod ff;
pub mod lfpe;
pub mod linalg;
pub mod mpoly;
pub mod orbits;
pub mod par;
pub mod polymap;
pub mod report;
pub mod scan;

pub use ff::{Elem, FieldCtx, UniPoly};
pub use mpoly::{MultiPoly, PolyRing};
pub use polymap::{format_map, parse_map, DetClass, Inversion, PolyMap};
