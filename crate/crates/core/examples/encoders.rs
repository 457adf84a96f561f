//! Builds the three input features of one OCR token and fuses them into the
//! joint representation.
//!
//! cargo run --example encoders

use textvqg::encoders::{
    build_positional, embed_token_words, encode_ocr, fuse, Fusion, OcrEncoder, VisualFeature, WordVectorTable,
    FUSED_DIM, JOINT_DIM, VISUAL_DIM, WORD_DIM,
};
use textvqg::nn::substream;
use textvqg::sample::{BoxAngles, BoxGeometry, OcrToken};

fn main() -> textvqg::Result<()> {
    let bbox = BoxGeometry {
        angles: Some(BoxAngles { rotation: 12.0, yaw: 0.0, roll: -3.0, pitch: 1.5 }),
        ..BoxGeometry::axis_aligned(120.0, 40.0, 200.0, 60.0)
    };
    let token = OcrToken::new("AIR CANADA", bbox);
    let phi_p = build_positional(&token.bbox, 640.0, 480.0)?;
    println!("positional feature: {:.3?}", phi_p.as_slice());

    let mut table = WordVectorTable::new(WORD_DIM);
    table.insert("air", vec![0.1; WORD_DIM])?;
    let vectors = embed_token_words(&token, &table);
    println!(
        "token words {:?}: {} vectors, 'canada' from the subword fallback: {}",
        token.words(),
        vectors.len(),
        !table.contains("canada")
    );

    let mut rng = substream(0, "example-encoders");
    let encoder = OcrEncoder::new(&mut rng, WORD_DIM, 256);
    let phi_o = encode_ocr(&vectors, &encoder)?;
    let phi_i = VisualFeature::new((0..VISUAL_DIM).map(|i| ((i as f64) * 0.01).sin()).collect())?;
    let fusion = Fusion::new(&mut rng, FUSED_DIM, 512, JOINT_DIM);
    let psi = fuse(&phi_o, &phi_i, &phi_p, &fusion)?;
    let norm = psi.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
    println!(
        "token feature {} dims, joint feature {} dims, |joint| = {norm:.4}",
        phi_o.len(),
        psi.len()
    );
    Ok(())
}
