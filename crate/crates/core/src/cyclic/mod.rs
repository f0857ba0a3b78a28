//! Fourier analysis on Z/NZ.
//!
//! Conventions: f̂(k) = E_x f(x) e(−kx/N), f∗g(x) = E_y f(y) g(x−y),
//! ⟨f,g⟩ = E f·conj(g), ‖f‖_p = (E|f|^p)^{1/p}.

mod counts;
mod fft;
mod function;
pub mod ntt;
mod spectrum;

pub use counts::{correlation_counts, pair_counts, representation_counts, representation_counts_float};
pub use function::{balanced_function, GroupFunction};
pub(crate) use function::lp_norm_of;
pub use spectrum::{spectrum, Spectrum};
