pub mod branch;
pub mod charfun;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod json;
pub mod krylov;
mod linalg;
pub mod modes;
pub mod network;
pub mod ode;
pub mod propagator;
pub mod scenario;

pub use error::{Error, Result};
pub use num_complex::Complex64;

// Book chapters are compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/propagator.md")]
    mod propagator {}
    #[doc = include_str!("../../../book/src/branch_states.md")]
    mod branch_states {}
    #[doc = include_str!("../../../book/src/charfun.md")]
    mod charfun {}
    #[doc = include_str!("../../../book/src/fock_oracle.md")]
    mod fock_oracle {}
    #[doc = include_str!("../../../book/src/entanglement.md")]
    mod entanglement {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
