use super::*;
use crate::data::{make_toy_dataset, ToyDataset};
use crate::olra::ModelDims;
use crate::text::MAX_QUESTION_LEN;

fn toy(n: usize) -> (ToyDataset, SideInfo, FeatureStore, Vocabulary) {
    let toy = make_toy_dataset(7, n);
    let side = toy.side_info();
    let wide = toy.visual_store(GRNN_INPUT_DIM);
    let vocab = build_vocab(toy.manifest.samples.iter().map(|s| &s.question), 1);
    (toy, side, wide, vocab)
}

fn small(epochs: usize) -> TrainConfig {
    TrainConfig {
        epochs,
        learning_rate: 0.01,
        seed: 3,
        dims: ModelDims {
            embed_dim: 6,
            joint_dim: 10,
            ..ModelDims::default()
        },
        ..TrainConfig::default()
    }
}

#[test]
fn kinds_parse_and_print() {
    for k in BaselineKind::ALL {
        assert_eq!(k.name().parse::<BaselineKind>().unwrap(), k);
    }
    let err = "lstm".parse::<BaselineKind>().unwrap_err().to_string();
    assert!(err.contains("melm, seq2seq, grnn"), "{err}");
}

#[test]
fn melm_beats_unigram_perplexity() {
    let (toy, side, _, vocab) = toy(64);
    let res = BaselineResources { side: &side, visual: None };
    let config = TrainConfig {
        epochs: 200,
        seed: 7,
        learning_rate: 1e-3,
        ..TrainConfig::default()
    };
    let out = train_baseline(BaselineKind::Melm, &toy.manifest, res, &vocab, &config, |_, _| Ok(())).unwrap();
    let BaselineModel::Melm(m) = &out.model else { panic!() };
    let ppl = melm_perplexity(m, &toy.manifest, res, &vocab, &config).unwrap();
    let targets: Vec<Vec<usize>> = toy
        .manifest
        .samples
        .iter()
        .map(|s| encode_question(&s.question, &vocab, config.max_len))
        .collect();
    let uni = unigram_perplexity(&targets);
    assert!(ppl < uni, "melm {ppl} vs unigram {uni}");
    // the log's last l_q is the running mean while training, close to ppl
    assert!(out.log.last().unwrap().l_q > 0.0);

    let q = generate_baseline(&out.model, &toy.manifest.samples[0], res, &vocab, &config, 1).unwrap();
    assert!(q.len() <= MAX_QUESTION_LEN);
    assert_eq!(q, generate_baseline(&out.model, &toy.manifest.samples[0], res, &vocab, &config, 1).unwrap());
}

#[test]
fn grnn_needs_4096_features() {
    let (toy, side, wide, vocab) = toy(6);
    let ok = train_baseline(
        BaselineKind::Grnn,
        &toy.manifest,
        BaselineResources { side: &side, visual: Some(&wide) },
        &vocab,
        &small(2),
        |_, _| Ok(()),
    )
    .unwrap();
    assert_eq!(ok.log.len(), 2);
    let err = train_baseline(
        BaselineKind::Grnn,
        &toy.manifest,
        BaselineResources { side: &side, visual: Some(&toy.store) },
        &vocab,
        &small(2),
        |_, _| Ok(()),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Dimension(_)), "{err}");
}

#[test]
fn seq2seq_is_seed_deterministic_and_generates_bounded_questions() {
    let (toy, side, _, vocab) = toy(8);
    let res = BaselineResources { side: &side, visual: None };
    let run = || train_baseline(BaselineKind::Seq2seq, &toy.manifest, res, &vocab, &small(2), |_, _| Ok(())).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.log[0].l_q, b.log[0].l_q);
    assert_eq!(a.model, b.model);
    for s in &toy.manifest.samples {
        let q = generate_baseline(&a.model, s, res, &vocab, &small(2), 2).unwrap();
        assert!(q.len() <= MAX_QUESTION_LEN);
        assert!(q.iter().all(|&id| id >= 4 && id < vocab.len()));
    }
}

#[test]
fn missing_side_info_names_sample_and_kind() {
    let (toy, _, _, vocab) = toy(3);
    let empty = SideInfo::default();
    let res = BaselineResources { side: &empty, visual: None };
    for kind in [BaselineKind::Melm, BaselineKind::Seq2seq] {
        let err = train_baseline(kind, &toy.manifest, res, &vocab, &small(1), |_, _| Ok(())).unwrap_err();
        match err {
            Error::MissingSideInfo { kind: k, sample, .. } => {
                assert_eq!(k, kind.name());
                assert_eq!(sample, 0);
            }
            other => panic!("{other}"),
        }
    }
}
