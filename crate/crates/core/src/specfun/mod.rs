//! Special functions used by the transfer curve and field models.

pub mod elliptic;
pub mod legendre;

pub use elliptic::{carlson_rd, carlson_rf, carlson_rj, ellip_e, ellip_k, ellip_pi, EllipticModulus};
pub use legendre::{
    legendre_p, legendre_p_all, legendre_p_assoc, legendre_p_at_one, legendre_p_at_zero, legendre_p_deriv,
    legendre_p_deriv_all,
};
