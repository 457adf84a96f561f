//! Deterministic synthetic dataset for desk-scale runs.
//!
//! Each image shows one object with one OCR token on it. The token kind
//! (number, name, brand, free text) decides the question template and where
//! the box sits; the object decides the visual feature prototype.

use rand::seq::SliceRandom;
use rand::Rng;

use super::manifest::{DatasetManifest, Source};
use super::store::FeatureStore;
use crate::baselines::{SideInfo, SideRecord};
use crate::nn::substream;
use crate::sample::{BoxAngles, BoxGeometry, OcrToken, Sample, Split};
use crate::text::tokenize;

const OBJECTS: [&str; 10] = [
    "aircraft", "bus", "bottle", "jersey", "sign", "truck", "store", "book", "phone", "board",
];
const SYLLABLES: [&str; 16] = [
    "in", "ta", "ko", "ra", "mi", "lo", "ven", "sa", "tor", "el", "pa", "ni", "do", "ru", "ka", "zen",
];
const TEXT_WORDS: [&str; 10] = [
    "stop", "here", "open", "exit", "sale", "only", "now", "left", "turn", "fresh",
];
const SCENES: [&str; 4] = ["street", "indoor", "field", "shop"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Number,
    Name,
    Brand,
    Text,
}

impl Kind {
    fn question(self, object: &str) -> String {
        match self {
            Kind::Number => format!("what is the number on the {object}?"),
            Kind::Name => format!("what is the name of the {object}?"),
            Kind::Brand => format!("what brand is the {object}?"),
            Kind::Text => format!("what does the {object} say?"),
        }
    }

    /// `(x range, y range, w range, h range)` in image fractions.
    fn region(self) -> [(f64, f64); 4] {
        match self {
            Kind::Number => [(0.3, 0.6), (0.55, 0.8), (0.05, 0.15), (0.05, 0.1)],
            Kind::Name => [(0.1, 0.5), (0.05, 0.2), (0.2, 0.4), (0.05, 0.1)],
            Kind::Brand => [(0.3, 0.5), (0.35, 0.5), (0.15, 0.3), (0.08, 0.15)],
            Kind::Text => [(0.05, 0.4), (0.2, 0.7), (0.3, 0.5), (0.05, 0.12)],
        }
    }
}

fn word(rng: &mut impl Rng, syllables: usize) -> String {
    (0..syllables).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect()
}

fn token_text(kind: Kind, rng: &mut impl Rng) -> String {
    match kind {
        Kind::Number => {
            let digits: u32 = rng.gen_range(2..=4);
            let n = rng.gen_range(10u32.pow(digits - 1)..10u32.pow(digits));
            if rng.gen_bool(0.3) {
                format!("{}-{n}", word(rng, 1).to_uppercase())
            } else {
                n.to_string()
            }
        }
        Kind::Name => word(rng, 2).to_uppercase(),
        Kind::Brand => {
            let syllables = rng.gen_range(2..=3);
            let w = word(rng, syllables);
            let mut c = w.chars();
            let first = c.next().expect("non-empty").to_uppercase();
            first.chain(c).collect()
        }
        Kind::Text => {
            let n = if rng.gen_bool(0.75) { 2 } else { 3 };
            let words: Vec<&str> = TEXT_WORDS.choose_multiple(rng, n).copied().collect();
            words.join(" ").to_uppercase()
        }
    }
}

/// A generated toy split together with what is needed to derive its
/// feature stores and side information.
#[derive(Debug, Clone)]
pub struct ToyDataset {
    pub seed: u64,
    pub manifest: DatasetManifest,
    /// 512-d visual features keyed by image id.
    pub store: FeatureStore,
    /// Object shown in each image, aligned with `manifest.samples`.
    pub objects: Vec<String>,
    scenes: Vec<String>,
}

impl ToyDataset {
    /// Visual features of any width: a per-object prototype plus per-image
    /// noise, both keyed by the dataset seed.
    pub fn visual_store(&self, dim: usize) -> FeatureStore {
        let mut store = FeatureStore::new(dim);
        for (s, obj) in self.manifest.samples.iter().zip(&self.objects) {
            if store.contains(&s.image_id) {
                continue;
            }
            let mut proto = substream(self.seed, &format!("toy-proto-{obj}-{dim}"));
            let mut noise = substream(self.seed, &format!("toy-visual-{}-{dim}", s.image_id));
            let v: Vec<f32> = (0..dim)
                .map(|_| {
                    let p: f64 = proto.gen_range(-1.0..1.0);
                    let e: f64 = noise.gen_range(-0.25..0.25);
                    (p + e) as f32
                })
                .collect();
            store.insert(s.image_id.clone(), &v).expect("unique image ids");
        }
        store
    }

    /// Object tags and a caption per image, standing in for a detector and a
    /// captioner.
    pub fn side_info(&self) -> SideInfo {
        let mut side = SideInfo::default();
        for ((s, obj), scene) in self.manifest.samples.iter().zip(&self.objects).zip(&self.scenes) {
            side.insert(
                s.image_id.clone(),
                SideRecord {
                    tags: vec![obj.clone(), scene.clone()],
                    caption: tokenize(&format!("a {obj} in a {scene} scene with text on it")),
                },
            );
        }
        side
    }
}

/// `n` training samples, bit-identical for a given seed.
pub fn make_toy_dataset(seed: u64, n: usize) -> ToyDataset {
    make_toy_split(seed, n, Split::Train)
}

pub fn make_toy_split(seed: u64, n: usize, split: Split) -> ToyDataset {
    let mut rng = substream(seed, &format!("toy-samples-{split}"));
    let mut samples = Vec::with_capacity(n);
    let mut objects = Vec::with_capacity(n);
    let mut scenes = Vec::with_capacity(n);
    for i in 0..n {
        let object = *OBJECTS.choose(&mut rng).expect("non-empty");
        let kind = *[Kind::Number, Kind::Name, Kind::Brand, Kind::Text]
            .choose(&mut rng)
            .expect("non-empty");
        let text = token_text(kind, &mut rng);
        let image_w = *[640.0, 800.0, 1024.0].choose(&mut rng).expect("non-empty");
        let image_h = *[480.0, 600.0, 768.0].choose(&mut rng).expect("non-empty");
        let [xr, yr, wr, hr] = kind.region();
        let mut frac = |r: (f64, f64)| rng.gen_range(r.0..r.1);
        let (fx, fy, fw, fh) = (frac(xr), frac(yr), frac(wr), frac(hr));
        let angles = rng.gen_bool(0.5).then(|| BoxAngles {
            rotation: rng.gen_range(-15.0..15.0),
            yaw: rng.gen_range(-5.0..5.0),
            roll: rng.gen_range(-5.0..5.0),
            pitch: rng.gen_range(-5.0..5.0),
        });
        let bbox = BoxGeometry {
            x: (fx * image_w).round(),
            y: (fy * image_h).round(),
            w: (fw * image_w).round().max(1.0),
            h: (fh * image_h).round().max(1.0),
            angles,
        };
        samples.push(Sample {
            image_id: format!("toy-{seed}-{split}-{i:05}"),
            image_w,
            image_h,
            ocr: OcrToken::new(text.clone(), bbox),
            question: tokenize(&kind.question(object)),
            answer: text,
            split,
        });
        objects.push(object.to_string());
        scenes.push(SCENES.choose(&mut rng).expect("non-empty").to_string());
    }
    let mut toy = ToyDataset {
        seed,
        manifest: DatasetManifest {
            name: format!("toy-{split}"),
            source: Source::Toy,
            samples,
        },
        store: FeatureStore::new(0),
        objects,
        scenes,
    };
    toy.store = toy.visual_store(crate::encoders::VISUAL_DIM);
    toy
}
