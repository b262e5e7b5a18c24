//! Exact combinatorics for rainbow matchings in families of uniform
//! hypergraphs: Hilton–Milner type extremal families, Kruskal–Katona
//! shadows, (1,k)-partite lifts, an exact matching/cover solver, and a
//! verification harness for the resulting dichotomy statements.

pub mod constructions;
pub mod error;
pub mod reductions;
pub mod sampling;
pub mod sets;
pub mod solver;
pub mod validate;
pub mod verify;

pub use constructions::{
    a_family, expand, hm_family, lift_near_perfect, lift_rainbow, star, threshold_em, threshold_hm,
    Label, PartiteHypergraph, RainbowInstance,
};
pub use error::{Error, Result};
pub use sets::{binom, cascade_repr, kk_bound, CascadeRepr, EdgeSet, SetFamily};
