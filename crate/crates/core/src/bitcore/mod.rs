//! Bit strings, binary entropy, Hamming balls and GF(2) polynomial arithmetic.

mod ball;
mod bitstring;
mod entropy;
mod gf2poly;

pub use ball::{
    enumerate_ball, hamming_ball_size, log2_ball_size, log2_biguint, BallIter, FlipSets,
    LikelySetSpec,
};
pub use bitstring::BitString;
pub use entropy::{binary_entropy, inverse_binary_entropy};
pub use gf2poly::{gen_irreducible, gf2_mul_mod, is_irreducible, Gf2Poly};

pub(crate) use entropy::h2;
