//! Ingests official ST-VQA or TextVQA files and reports what the
//! answer-is-an-OCR-token filter kept and dropped.
//!
//! cargo run --example ingest_official -- stvqa ANNOTATIONS.json OCR.json
//! cargo run --example ingest_official -- textvqa TextVQA_0.5.1_train.json TextVQA_Rosetta_OCR_v0.2_train.json
//!
//! Without arguments a three-question file pair is written to a temporary
//! directory and ingested.

use std::path::PathBuf;

use serde_json::json;
use textvqg::data::{ingest_stvqa, ingest_textvqa, Ingested};
use textvqg::sample::Split;

fn demo_files() -> std::io::Result<(PathBuf, PathBuf)> {
    let dir = std::env::temp_dir().join("textvqg-ingest-demo");
    std::fs::create_dir_all(&dir)?;
    let ann = json!({"data": [
        {"image_id": "img1", "question_id": 1, "question": "What is the name of the aircraft?",
         "answers": ["INTA"], "image_width": 200, "image_height": 100},
        {"image_id": "img1", "question_id": 2, "question": "Is it flying?",
         "answers": ["yes"], "image_width": 200, "image_height": 100},
        {"image_id": "img2", "question_id": 3, "question": "What does it say?",
         "answers": ["stop"], "image_width": 50, "image_height": 50}
    ]});
    let ocr = json!({"data": [
        {"image_id": "img1", "ocr_info": [
            {"word": "INTA", "bounding_box": {"top_left_x": 0.1, "top_left_y": 0.2, "width": 0.25,
             "height": 0.1, "rotation": 0.0, "roll": 0.0, "pitch": 0.0, "yaw": 0.0}},
            {"word": "EC-634", "bounding_box": {"top_left_x": 0.5, "top_left_y": 0.2, "width": 0.3,
             "height": 0.1, "rotation": 0.0, "roll": 0.0, "pitch": 0.0, "yaw": 0.0}}]}
    ]});
    let (a, o) = (dir.join("annotations.json"), dir.join("rosetta.json"));
    std::fs::write(&a, ann.to_string())?;
    std::fs::write(&o, ocr.to_string())?;
    Ok((a, o))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let got: Ingested = match args.as_slice() {
        [kind, ann, ocr] if kind == "stvqa" => ingest_stvqa(ann.as_ref(), ocr.as_ref(), Split::Train)?,
        [kind, ann, ocr] if kind == "textvqa" => ingest_textvqa(ann.as_ref(), ocr.as_ref(), Split::Train)?,
        [] => {
            let (ann, ocr) = demo_files()?;
            ingest_textvqa(&ann, &ocr, Split::Train)?
        }
        _ => return Err("usage: ingest_official [stvqa|textvqa ANNOTATIONS OCR]".into()),
    };
    println!(
        "kept {} questions over {} images",
        got.manifest.len(),
        got.manifest.image_count()
    );
    for (reason, count) in got.skip_summary() {
        println!("dropped {count:>6}  {reason}");
    }
    for s in got.manifest.samples.iter().take(3) {
        println!("{} | {} | {}", s.image_id, s.ocr.text, s.question.join(" "));
    }
    Ok(())
}
