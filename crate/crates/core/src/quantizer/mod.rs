//! Fixed-size codebooks: jump positions, values and whole paths.

pub mod bigmath;
pub mod composite;
pub mod position;
pub mod value;

pub use composite::{
    composite_codebook, eps0_surrogate, increment_gamma, CodewordParts, CompositePathCodebook, QuantMode, ValueSource,
};
pub use position::{
    c_star, midpoint_product_codebook, ordered_codebook_for_rate, ordered_grid_codebook, position_codebook_for_rate,
    PositionCodebook, PositionKind,
};
pub use value::{product_value_codebook, IncrementCodebook, IncrementNet, ValueCodebook};
