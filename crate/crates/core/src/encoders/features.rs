use crate::error::{Error, Result};

pub const VISUAL_DIM: usize = 512;
pub const TOKEN_DIM: usize = 512;
pub const POS_DIM: usize = 8;
pub const JOINT_DIM: usize = 512;
/// `TOKEN_DIM + VISUAL_DIM + POS_DIM`
pub const FUSED_DIM: usize = TOKEN_DIM + VISUAL_DIM + POS_DIM;
pub const WORD_DIM: usize = 300;

fn check(name: &str, v: &[f64], dim: Option<usize>) -> Result<()> {
    if let Some(d) = dim {
        if v.len() != d {
            return Err(Error::Dimension(format!("{name} has {} entries, expected {d}", v.len())));
        }
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid(format!("{name} contains non-finite values")));
    }
    Ok(())
}

macro_rules! feature {
    ($(#[$m:meta])* $name:ident, $label:literal) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(Vec<f64>);

        impl $name {
            /// Wraps a finite vector of the model's configured width.
            pub fn new(v: Vec<f64>) -> Result<Self> {
                check($label, &v, None)?;
                Ok($name(v))
            }

            /// Wraps a vector that must have exactly `dim` entries.
            pub fn with_dim(v: Vec<f64>, dim: usize) -> Result<Self> {
                check($label, &v, Some(dim))?;
                Ok($name(v))
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }
    };
}

feature!(
    /// Pooled visual feature of an image.
    VisualFeature, "visual feature"
);
feature!(
    /// B-LSTM encoding of an OCR token.
    TokenFeature, "token feature"
);
feature!(
    /// Normalized box geometry: `[x, y, w, h, rotation, yaw, roll, pitch]`.
    PosFeature, "positional feature"
);
feature!(
    /// Fused representation of visual, token and positional features.
    JointFeature, "joint feature"
);

impl PosFeature {
    pub fn zeros() -> Self {
        PosFeature(vec![0.0; POS_DIM])
    }
}
