//! Domain records shared by ingestion, the models and evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text;

/// Rotation angles of an OCR box, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxAngles {
    pub rotation: f64,
    pub yaw: f64,
    pub roll: f64,
    pub pitch: f64,
}

/// Pixel-space bounding box of an OCR token.
///
/// `angles` is `None` when the OCR source only provides axis-aligned boxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGeometry {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub angles: Option<BoxAngles>,
}

impl BoxGeometry {
    pub fn axis_aligned(x: f64, y: f64, w: f64, h: f64) -> Self {
        BoxGeometry {
            x,
            y,
            w,
            h,
            angles: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite());
        if !finite || self.w <= 0.0 || self.h <= 0.0 || self.x < 0.0 || self.y < 0.0 {
            return Err(Error::Invalid(format!("bad box geometry {self:?}")));
        }
        Ok(())
    }

    /// Smallest box covering both; angles are taken from `self`.
    pub fn union(&self, other: &BoxGeometry) -> BoxGeometry {
        let x0 = self.x.min(other.x);
        let y0 = self.y.min(other.y);
        let x1 = (self.x + self.w).max(other.x + other.w);
        let y1 = (self.y + self.h).max(other.y + other.h);
        BoxGeometry {
            x: x0,
            y: y0,
            w: x1 - x0,
            h: y1 - y0,
            angles: self.angles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "OcrRecord", into = "OcrRecord")]
pub struct OcrToken {
    pub text: String,
    pub bbox: BoxGeometry,
    /// Recognizer confidence, when the OCR source reports one.
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct PlainBox {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

/// Manifest layout: `{text, box: {x, y, w, h}, angles?, confidence?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct OcrRecord {
    text: String,
    #[serde(rename = "box")]
    bbox: PlainBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angles: Option<BoxAngles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    confidence: Option<f64>,
}

impl From<OcrRecord> for OcrToken {
    fn from(r: OcrRecord) -> Self {
        OcrToken {
            text: r.text,
            bbox: BoxGeometry {
                x: r.bbox.x,
                y: r.bbox.y,
                w: r.bbox.w,
                h: r.bbox.h,
                angles: r.angles,
            },
            confidence: r.confidence,
        }
    }
}

impl From<OcrToken> for OcrRecord {
    fn from(t: OcrToken) -> Self {
        OcrRecord {
            text: t.text,
            bbox: PlainBox {
                x: t.bbox.x,
                y: t.bbox.y,
                w: t.bbox.w,
                h: t.bbox.h,
            },
            angles: t.bbox.angles,
            confidence: t.confidence,
        }
    }
}

impl OcrToken {
    pub fn new(text: impl Into<String>, bbox: BoxGeometry) -> Self {
        OcrToken {
            text: text.into(),
            bbox,
            confidence: None,
        }
    }

    /// Normalized words of the token text.
    pub fn words(&self) -> Vec<String> {
        text::normalize_words(&self.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Split::Train => f.write_str("train"),
            Split::Test => f.write_str("test"),
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(Error::Unknown {
                what: "split",
                value: s.to_string(),
                expected: "train, test".into(),
            }),
        }
    }
}

/// One (image, OCR token, question) unit. Serialized as one line of the
/// canonical JSONL manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub image_id: String,
    pub image_w: f64,
    pub image_h: f64,
    pub ocr: OcrToken,
    /// Tokenized ground-truth question.
    pub question: Vec<String>,
    pub answer: String,
    pub split: Split,
}

impl Sample {
    pub fn validate(&self) -> Result<()> {
        if !(self.image_w > 0.0 && self.image_h > 0.0) {
            return Err(Error::Invalid(format!(
                "image {} has non-positive size {}x{}",
                self.image_id, self.image_w, self.image_h
            )));
        }
        if self.ocr.words().is_empty() {
            return Err(Error::Invalid(format!(
                "image {}: OCR token text is empty after normalization",
                self.image_id
            )));
        }
        self.ocr.bbox.validate()?;
        if self.split == Split::Train && self.question.is_empty() {
            return Err(Error::Invalid(format!(
                "image {}: training sample without a question",
                self.image_id
            )));
        }
        Ok(())
    }

    /// Number of words in the answer, used for the n-word answer slices.
    pub fn answer_word_count(&self) -> usize {
        text::normalize_words(&self.answer).len().max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_covers_both_boxes() {
        let a = BoxGeometry::axis_aligned(10.0, 10.0, 5.0, 5.0);
        let b = BoxGeometry::axis_aligned(20.0, 12.0, 10.0, 2.0);
        let u = a.union(&b);
        assert_eq!((u.x, u.y, u.w, u.h), (10.0, 10.0, 20.0, 5.0));
    }

    #[test]
    fn rejects_degenerate_box() {
        assert!(BoxGeometry::axis_aligned(0.0, 0.0, 0.0, 1.0).validate().is_err());
        assert!(BoxGeometry::axis_aligned(-1.0, 0.0, 1.0, 1.0).validate().is_err());
        assert!(BoxGeometry::axis_aligned(0.0, 0.0, 1.0, 1.0).validate().is_ok());
    }

    #[test]
    fn serializes_box_and_angles_separately() {
        let tok = OcrToken::new("INTA", BoxGeometry::axis_aligned(1.0, 2.0, 3.0, 4.0));
        let json = serde_json::to_string(&tok).unwrap();
        assert_eq!(json, r#"{"text":"INTA","box":{"x":1.0,"y":2.0,"w":3.0,"h":4.0}}"#);

        let rotated = OcrToken::new(
            "EC-634",
            BoxGeometry {
                angles: Some(BoxAngles { rotation: 5.0, yaw: 0.0, roll: 0.0, pitch: 1.0 }),
                ..BoxGeometry::axis_aligned(1.0, 2.0, 3.0, 4.0)
            },
        );
        let json = serde_json::to_string(&rotated).unwrap();
        assert!(json.contains(r#""angles":{"rotation":5.0,"yaw":0.0,"roll":0.0,"pitch":1.0}"#), "{json}");
        assert_eq!(serde_json::from_str::<OcrToken>(&json).unwrap(), rotated);
    }
}
