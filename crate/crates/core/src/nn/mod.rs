//! Minimal dense layers with hand-written backward passes.
//!
//! Every learnable block implements [`Tensors`], which walks its weight
//! matrices in a fixed order. Gradients are stored in a value of the same
//! type as the parameters, so optimizers, checkpoints and gradient checks can
//! all be written once against the trait.

pub mod adam;
pub mod decoder;
pub mod gradcheck;
pub mod gru;
pub mod layers;
pub mod loss;
pub mod lstm;

use ndarray::{Array2, Zip};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Mat = Array2<f64>;

pub trait Tensors {
    /// Visit every weight matrix with its dotted path name.
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Mat));
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Mat));

    fn named(&self) -> Vec<(String, &Mat)> {
        let mut out = Vec::new();
        self.visit("", &mut |name, m| out.push((name, m)));
        out
    }

    fn param_count(&self) -> usize {
        self.named().iter().map(|(_, m)| m.len()).sum()
    }

    fn fill_zero(&mut self) {
        self.visit_mut(&mut |m| m.fill(0.0));
    }

    fn all_finite(&self) -> bool {
        self.named().iter().all(|(_, m)| m.iter().all(|v| v.is_finite()))
    }
}

pub fn zeros_like<T: Tensors + Clone>(t: &T) -> T {
    let mut z = t.clone();
    z.fill_zero();
    z
}

pub(crate) fn join_name(prefix: &str, field: &str) -> String {
    if prefix.is_empty() {
        field.to_string()
    } else {
        format!("{prefix}.{field}")
    }
}

impl Tensors for Mat {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Mat)) {
        f(prefix.to_string(), self);
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Mat)) {
        f(self);
    }
}

impl<T: Tensors> Tensors for Option<T> {
    fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Mat)) {
        if let Some(t) = self {
            t.visit(prefix, f);
        }
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Mat)) {
        if let Some(t) = self {
            t.visit_mut(f);
        }
    }
}

/// Implements [`Tensors`] for a struct by visiting the listed fields in order.
macro_rules! impl_tensors {
    ($ty:ty { $($field:ident),+ $(,)? }) => {
        impl $crate::nn::Tensors for $ty {
            fn visit<'a>(
                &'a self,
                prefix: &str,
                f: &mut dyn FnMut(String, &'a $crate::nn::Mat),
            ) {
                $( $crate::nn::Tensors::visit(
                    &self.$field,
                    &$crate::nn::join_name(prefix, stringify!($field)),
                    f,
                ); )+
            }
            fn visit_mut(&mut self, f: &mut dyn FnMut(&mut $crate::nn::Mat)) {
                $( $crate::nn::Tensors::visit_mut(&mut self.$field, f); )+
            }
        }
    };
}
pub(crate) use impl_tensors;

/// Deterministic generator for a named random substream.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a over the name, mixed with the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ h.rotate_left(17));
    // Discard a word so nearby seeds decorrelate quickly.
    let _: u64 = rng.gen();
    rng
}

pub fn uniform(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> Mat {
    Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-scale..=scale))
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `acc += x` elementwise.
pub(crate) fn add_into(acc: &mut Mat, x: &Mat) {
    Zip::from(acc).and(x).for_each(|a, &b| *a += b);
}

/// Squared l2 norm of all gradient entries.
pub fn sq_norm<T: Tensors>(t: &T) -> f64 {
    t.named().iter().map(|(_, m)| m.iter().map(|v| v * v).sum::<f64>()).sum()
}

/// Rescale `grads` so their global l2 norm is at most `max_norm`.
pub fn clip_global_norm<T: Tensors>(grads: &mut T, max_norm: f64) -> f64 {
    let norm = sq_norm(grads).sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        grads.visit_mut(&mut |m| m.mapv_inplace(|v| v * scale));
    }
    norm
}
