//! Exact arithmetic for Severi–Brauer surfaces over radical towers of ℚ(ζ)(t₁, …, tₙ).

pub mod scalar;
pub mod gcd;
pub mod poly;
pub mod ratfun;
pub mod error;
pub mod tower;
pub mod cubes;
pub mod par;
pub mod linalg;
pub mod galois;
pub mod severi_brauer;
pub mod expr;
pub mod maps;
pub mod cubic_models;
pub mod words;
pub mod genus;
pub mod json;
pub mod cli;
