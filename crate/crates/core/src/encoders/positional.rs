use super::features::{PosFeature, POS_DIM};
use crate::error::{Error, Result};
use crate::sample::BoxGeometry;

/// Box geometry normalized by the image size, angles divided by 180°.
/// Angle slots stay zero for axis-aligned boxes.
pub fn build_positional(bbox: &BoxGeometry, image_w: f64, image_h: f64) -> Result<PosFeature> {
    if !(image_w > 0.0 && image_h > 0.0) {
        return Err(Error::Invalid(format!(
            "image size must be positive, got {image_w}x{image_h}"
        )));
    }
    let unit = |v: f64| v.clamp(0.0, 1.0);
    let angle = |deg: f64| (deg / 180.0).clamp(-1.0, 1.0);
    let mut v = vec![0.0; POS_DIM];
    v[0] = unit(bbox.x / image_w);
    v[1] = unit(bbox.y / image_h);
    v[2] = unit(bbox.w / image_w);
    v[3] = unit(bbox.h / image_h);
    if let Some(a) = bbox.angles {
        v[4] = angle(a.rotation);
        v[5] = angle(a.yaw);
        v[6] = angle(a.roll);
        v[7] = angle(a.pitch);
    }
    PosFeature::with_dim(v, POS_DIM)
}
