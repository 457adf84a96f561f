//! Readers for the ST-VQA and TextVQA annotation releases.
//!
//! Annotation files follow the official `{"data": [...]}` layout. OCR files
//! use the Rosetta layout shipped with TextVQA: `{"data": [{"image_id",
//! "ocr_info": [{"word", "bounding_box": {...}}]}]}`. Rosetta boxes are
//! normalized to [0, 1]; ST-VQA OCR files carry pixel boxes and usually no
//! angle fields.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use super::manifest::{DatasetManifest, Ingested, SkipEntry, Source};
use super::matching::answer_matches_ocr;
use crate::error::{Error, Result};
use crate::sample::{BoxAngles, BoxGeometry, OcrToken, Sample, Split};
use crate::text::tokenize;

#[derive(Debug, Deserialize)]
struct AnnotationFile {
    data: Vec<Annotation>,
}

#[derive(Debug, Deserialize)]
struct Annotation {
    #[serde(default)]
    image_id: Option<String>,
    #[serde(default)]
    file_path: Option<String>,
    #[serde(default)]
    file_name: Option<String>,
    #[serde(default)]
    question_id: Option<serde_json::Value>,
    question: String,
    #[serde(default)]
    answers: Vec<String>,
    #[serde(default)]
    image_width: Option<f64>,
    #[serde(default)]
    image_height: Option<f64>,
}

impl Annotation {
    fn image_key(&self) -> Option<&str> {
        self.image_id
            .as_deref()
            .or(self.file_path.as_deref())
            .or(self.file_name.as_deref())
    }

    fn question_id(&self) -> Option<String> {
        self.question_id.as_ref().map(|v| match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
    }

    /// Answers by descending frequency, ties by first appearance.
    fn ranked_answers(&self) -> Vec<&str> {
        let mut seen: Vec<(&str, usize, usize)> = Vec::new();
        for (i, a) in self.answers.iter().enumerate() {
            match seen.iter_mut().find(|(s, _, _)| *s == a.as_str()) {
                Some(e) => e.1 += 1,
                None => seen.push((a.as_str(), 1, i)),
            }
        }
        seen.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
        seen.into_iter().map(|(s, _, _)| s).collect()
    }
}

#[derive(Debug, Deserialize)]
struct OcrFile {
    data: Vec<OcrImage>,
}

#[derive(Debug, Deserialize)]
struct OcrImage {
    #[serde(alias = "file_path")]
    image_id: String,
    #[serde(default)]
    image_width: Option<f64>,
    #[serde(default)]
    image_height: Option<f64>,
    #[serde(default)]
    ocr_info: Vec<OcrInfo>,
}

#[derive(Debug, Deserialize)]
struct OcrInfo {
    word: String,
    bounding_box: RawBox,
    #[serde(default)]
    confidence: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct RawBox {
    top_left_x: f64,
    top_left_y: f64,
    width: f64,
    height: f64,
    #[serde(default)]
    rotation: Option<f64>,
    #[serde(default)]
    yaw: Option<f64>,
    #[serde(default)]
    roll: Option<f64>,
    #[serde(default)]
    pitch: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Coords {
    Normalized,
    Pixels,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

fn convert_box(raw: &RawBox, coords: Coords, w: f64, h: f64) -> std::result::Result<BoxGeometry, &'static str> {
    let (sx, sy) = match coords {
        Coords::Normalized => (w, h),
        Coords::Pixels => (1.0, 1.0),
    };
    let angles = match (raw.rotation, raw.yaw, raw.roll, raw.pitch) {
        (Some(rotation), Some(yaw), Some(roll), Some(pitch)) => Some(BoxAngles {
            rotation,
            yaw,
            roll,
            pitch,
        }),
        (None, None, None, None) => None,
        _ => return Err("partial box angles"),
    };
    let mut x = raw.top_left_x * sx;
    let mut y = raw.top_left_y * sy;
    let mut bw = raw.width * sx;
    let mut bh = raw.height * sy;
    // clamp into the image
    if x < 0.0 {
        bw += x;
        x = 0.0;
    }
    if y < 0.0 {
        bh += y;
        y = 0.0;
    }
    bw = bw.min(w - x);
    bh = bh.min(h - y);
    let bbox = BoxGeometry { x, y, w: bw, h: bh, angles };
    bbox.validate().map_err(|_| "invalid OCR box")?;
    Ok(bbox)
}

fn ingest(
    name: &str,
    source: Source,
    split: Split,
    annotation_path: &Path,
    ocr_path: &Path,
    coords: Coords,
) -> Result<Ingested> {
    let annotations: AnnotationFile = read_json(annotation_path)?;
    let ocr: OcrFile = read_json(ocr_path)?;
    let by_image: HashMap<&str, &OcrImage> =
        ocr.data.iter().map(|r| (r.image_id.as_str(), r)).collect();

    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for (i, ann) in annotations.data.iter().enumerate() {
        let skip = |image_id: &str, reason: &str| SkipEntry {
            record: i,
            image_id: image_id.to_string(),
            question_id: ann.question_id(),
            reason: reason.to_string(),
        };
        let Some(image_id) = ann.image_key() else {
            return Err(Error::Parse {
                path: annotation_path.to_path_buf(),
                location: format!("record {i}"),
                message: "record has no image_id, file_path or file_name".into(),
            });
        };
        let Some(ocr_image) = by_image.get(image_id) else {
            skipped.push(skip(image_id, "missing OCR record"));
            continue;
        };
        let (Some(w), Some(h)) = (
            ann.image_width.or(ocr_image.image_width),
            ann.image_height.or(ocr_image.image_height),
        ) else {
            skipped.push(skip(image_id, "missing image size"));
            continue;
        };
        if !(w > 0.0 && h > 0.0) {
            skipped.push(skip(image_id, "non-positive image size"));
            continue;
        }
        if ocr_image.ocr_info.is_empty() {
            skipped.push(skip(image_id, "no OCR tokens"));
            continue;
        }
        let tokens: Vec<OcrToken> = ocr_image
            .ocr_info
            .iter()
            .filter_map(|info| {
                let bbox = convert_box(&info.bounding_box, coords, w, h).ok()?;
                Some(OcrToken {
                    text: info.word.clone(),
                    bbox,
                    confidence: info.confidence,
                })
            })
            .collect();
        if tokens.is_empty() {
            skipped.push(skip(image_id, "no valid OCR boxes"));
            continue;
        }
        let question = tokenize(&ann.question);
        if question.is_empty() {
            skipped.push(skip(image_id, "empty question"));
            continue;
        }
        let matched = ann
            .ranked_answers()
            .into_iter()
            .find_map(|a| answer_matches_ocr(a, &tokens).map(|t| (a, t)));
        let Some((answer, ocr_token)) = matched else {
            skipped.push(skip(image_id, "answer not among OCR tokens"));
            continue;
        };
        let sample = Sample {
            image_id: image_id.to_string(),
            image_w: w,
            image_h: h,
            ocr: ocr_token,
            question,
            answer: answer.to_string(),
            split,
        };
        if sample.validate().is_err() {
            skipped.push(skip(image_id, "invalid sample"));
            continue;
        }
        samples.push(sample);
    }
    Ok(Ingested {
        manifest: DatasetManifest {
            name: format!("{name}-{split}"),
            source,
            samples,
        },
        skipped,
    })
}

/// ST-VQA annotations joined with pixel-space OCR boxes.
pub fn ingest_stvqa(annotation_path: &Path, ocr_path: &Path, split: Split) -> Result<Ingested> {
    ingest("stvqa", Source::Stvqa, split, annotation_path, ocr_path, Coords::Pixels)
}

/// TextVQA annotations joined with the Rosetta OCR release.
pub fn ingest_textvqa(annotation_path: &Path, rosetta_ocr_path: &Path, split: Split) -> Result<Ingested> {
    ingest(
        "textvqa",
        Source::Textvqa,
        split,
        annotation_path,
        rosetta_ocr_path,
        Coords::Normalized,
    )
}
