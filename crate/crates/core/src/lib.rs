pub mod checks;
pub mod error;
pub mod gabor;
pub mod lattice;
pub mod moyal;
pub mod numerics;
pub mod report;
pub mod soliton;
pub mod tf;
pub mod window;

pub use error::{Error, Result};
pub use numerics::{herm_inv_sqrt, inner_l2, make_grid, Grid1D, GridFunction, C64};
pub use tf::{PhasePoint, Symbol2D};
pub use window::{realize_window, window_derivative, Window};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/phase_space.md")]
    mod phase_space {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/frames.md")]
    mod frames {}
    #[doc = include_str!("../../../book/src/solitons.md")]
    mod solitons {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
