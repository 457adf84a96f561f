//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use textvqg::baselines::{GrnnModel, MelmModel, Seq2SeqModel};
use textvqg::cli::{run_from, AblationResult};
use textvqg::data::{make_toy_dataset, FeatureStore, Source};
use textvqg::encoders::{Fusion, OcrEncoder, WordVectorTable};
use textvqg::metrics::{bleu_corpus, lcs_length, meteor, rouge_l, EvalPair};
use textvqg::models::olra_input;
use textvqg::nn::gradcheck::{check, rel_error};
use textvqg::nn::{substream, uniform, zeros_like, Mat};
use textvqg::olra::{
    consistency_loss, question_nll, reconstruct_ocr, train_olra, ModelDims, OlraModel, Stores, TrainConfig,
};
use textvqg::sample::Split;
use textvqg::text::{build_vocab, decode_ids, encode_question};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    // Unigram counts: a and b match, d does not; equal lengths give BP = 1.
    let bleu1 = bleu_corpus(&[EvalPair::single(words("a b c"), words("a b d"))], 1);
    ensure((bleu1 - 2.0 / 3.0).abs() < 1e-12, || format!("BLEU-1 {bleu1}"))?;
    // LCS(abcd, acd) = 3, P = 3/4, R = 1.
    let (p, r, b2) = (0.75, 1.0, 1.44);
    let want = (1.0 + b2) * p * r / (r + b2 * p);
    let rl = rouge_l(&words("a b c d"), &words("a c d"));
    ensure((rl - want).abs() < 1e-12 && (rl - 0.8798).abs() < 1e-4, || format!("ROUGE-L {rl}"))?;
    let m4 = meteor(&words("a b c d"), &words("a b c d"));
    ensure(m4 == 1.0 - 0.5 * (1.0f64 / 4.0).powi(3) && m4 == 0.9921875, || format!("METEOR {m4}"))?;
    let rev = meteor(&words("a b"), &words("b a"));
    ensure(rev == 0.5, || format!("reversed METEOR {rev}"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("bleu1={bleu1:.6} rouge_l={rl:.6} meteor={m4} reversed={rev}"))
}

fn random_seq(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<String> {
    const V: [&str; 6] = ["what", "is", "the", "name", "bus", "on"];
    let n = rng.gen_range(1..=max_len);
    (0..n).map(|_| V[rng.gen_range(0..V.len())].to_string()).collect()
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..1000 {
        let a = random_seq(&mut rng, 12);
        let b = random_seq(&mut rng, 12);
        let pair = EvalPair::single(a.clone(), b.clone());
        for (name, v) in [
            ("bleu", bleu_corpus(std::slice::from_ref(&pair), 4)),
            ("rouge_l", rouge_l(&a, &b)),
            ("meteor", meteor(&a, &b)),
        ] {
            ensure((0.0..=1.0).contains(&v), || format!("pair {i}: {name} {v} out of range"))?;
        }
        let with_self = EvalPair::new(a.clone(), vec![b.clone(), a.clone()]).map_err(|e| e.to_string())?;
        let bs = bleu_corpus(&[with_self], 4);
        ensure(bs == 1.0, || format!("pair {i}: candidate in references gives BLEU {bs}"))?;
        ensure(rouge_l(&a, &a) == 1.0, || format!("pair {i}: rouge_l(a, a) != 1"))?;
        let want = 1.0 - 0.5 / (a.len() as f64).powi(3);
        let got = meteor(&a, &a);
        ensure((got - want).abs() <= f64::EPSILON, || format!("pair {i}: meteor(a, a) {got} vs {want}"))?;
        let (l, l_rev) = (lcs_length(&a, &b), lcs_length(&b, &a));
        ensure(l == l_rev && l <= a.len().min(b.len()), || format!("pair {i}: lcs {l} / {l_rev}"))?;
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("1000 pairs in {:?}", start.elapsed()))
}

const TOL: f64 = 1e-4;
const EPS: f64 = 1e-5;

fn reduced_dims() -> ModelDims {
    ModelDims {
        word_dim: 4,
        token_hidden: 4,
        visual_dim: 8,
        fusion_hidden: 8,
        joint_dim: 8,
        recon_hidden: 8,
        embed_dim: 5,
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = substream(3, "acceptance-gradcheck");
    let mut worst: Vec<(&str, f64)> = Vec::new();

    let fusion = Fusion::new(&mut rng, 8 + 8 + 8, 8, 8);
    let x = uniform(&mut rng, 3, fusion.input_dim(), 1.0);
    let r = uniform(&mut rng, 3, 8, 1.0);
    let (_, trace) = fusion.forward_batch(&x).map_err(|e| e.to_string())?;
    let mut g = zeros_like(&fusion);
    fusion.backward_batch(&trace, &r, &mut g);
    let rep = check(&fusion, &g, EPS, |f: &Fusion| (&f.forward_batch(&x).unwrap().0 * &r).sum());
    worst.push(("fuse", rep.max_rel_error));

    let enc = OcrEncoder::new(&mut rng, 4, 4);
    let seqs: Vec<Mat> = (1..=3).map(|n| uniform(&mut rng, n, 4, 1.0)).collect();
    let refs: Vec<&Mat> = seqs.iter().collect();
    let r = uniform(&mut rng, 3, enc.output_dim(), 1.0);
    let (_, trace) = enc.forward_batch(&refs).map_err(|e| e.to_string())?;
    let mut g = zeros_like(&enc);
    enc.backward_batch(&trace, &r, &mut g);
    let rep = check(&enc, &g, EPS, |e: &OcrEncoder| (&e.forward_batch(&refs).unwrap().0 * &r).sum());
    worst.push(("encode_ocr", rep.max_rel_error));

    let model = OlraModel::new(4, &reduced_dims(), 8, 10);
    let psi_v: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let phi_o: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let psi = textvqg::encoders::JointFeature::with_dim(psi_v.clone(), 8).map_err(|e| e.to_string())?;
    let psi_m = Array2::from_shape_vec((1, 8), psi_v.clone()).unwrap();
    let (hat, trace) = model.recon.forward(&psi_m);
    let dy = &hat - &Array2::from_shape_vec((1, 8), phi_o.clone()).unwrap();
    let mut g = zeros_like(&model.recon);
    let dpsi = model.recon.backward(&trace, &(dy * 2.0), &mut g);
    let recon_loss = |m: &OlraModel, p: &textvqg::encoders::JointFeature| {
        consistency_loss(&phi_o, &reconstruct_ocr(p, m).unwrap()).unwrap()
    };
    let rep = check(&model.recon, &g, EPS, |head| {
        let mut m = model.clone();
        m.recon = head.clone();
        recon_loss(&m, &psi)
    });
    let mut err = rep.max_rel_error;
    for k in 0..8 {
        let mut up = psi_v.clone();
        let mut down = psi_v.clone();
        up[k] += EPS;
        down[k] -= EPS;
        let f = |v: Vec<f64>| recon_loss(&model, &textvqg::encoders::JointFeature::with_dim(v, 8).unwrap());
        err = err.max(rel_error(dpsi[[0, k]], (f(up) - f(down)) / (2.0 * EPS)));
    }
    worst.push(("reconstruct_ocr", err));

    let ids = [1usize, 4, 7, 9, 2];
    let batch = textvqg::nn::decoder::TeacherBatch::new(&[&ids[..]]).map_err(|e| e.to_string())?;
    let c0 = Mat::zeros((1, 8));
    let (_, trace) = model.decoder.teacher_forced(&psi_m, &c0, &batch);
    let mut g = zeros_like(&model.decoder);
    let (dh0, _) = model.decoder.backward(&trace, &mut g);
    let rep = check(&model.decoder, &g, EPS, |d| {
        let mut m = model.clone();
        m.decoder = d.clone();
        question_nll(&psi, &ids, &m).unwrap()
    });
    let mut err = rep.max_rel_error;
    for k in 0..8 {
        let mut up = psi_v.clone();
        let mut down = psi_v.clone();
        up[k] += EPS;
        down[k] -= EPS;
        let f = |v: Vec<f64>| {
            question_nll(&textvqg::encoders::JointFeature::with_dim(v, 8).unwrap(), &ids, &model).unwrap()
        };
        err = err.max(rel_error(dh0[[0, k]], (f(up) - f(down)) / (2.0 * EPS)));
    }
    worst.push(("question_nll", err));

    let targets: Vec<Vec<usize>> = vec![vec![1, 4, 5, 2], vec![1, 9, 2], vec![1, 6, 7, 8, 3, 2]];
    let t: Vec<&[usize]> = targets.iter().map(Vec::as_slice).collect();

    let feats: Vec<String> = ["bias", "h1=<sos>", "h1=what", "ocr=inta", "tag=bus", "h2=<sos>"]
        .map(String::from)
        .to_vec();
    let mut melm = MelmModel::new(feats, 10, 2);
    melm.weights = uniform(&mut rng, 6, 10, 1.0);
    let events = vec![
        (vec![(0, 1.0), (1, 1.0), (3, 1.0)], 4),
        (vec![(0, 1.0), (2, 1.0), (4, 1.0), (5, 1.0)], 9),
        (vec![(0, 1.0), (3, 1.0)], 2),
    ];
    let (_, g) = melm.loss_and_grad(&events, true);
    let rep = check(&melm, &g.unwrap(), EPS, |m: &MelmModel| m.loss_and_grad(&events, false).0);
    worst.push(("melm", rep.max_rel_error));

    let s2s = Seq2SeqModel::new(&mut rng, 9, 10, 5, 8);
    let src: Vec<Vec<usize>> = vec![vec![4, 5, 6], vec![7], vec![8, 4]];
    let s: Vec<&[usize]> = src.iter().map(Vec::as_slice).collect();
    let (_, g) = s2s.loss_and_grad(&s, &t, true).map_err(|e| e.to_string())?;
    let rep = check(&s2s, &g.unwrap(), EPS, |m: &Seq2SeqModel| m.loss_and_grad(&s, &t, false).unwrap().0);
    worst.push(("seq2seq", rep.max_rel_error));

    let grnn = GrnnModel::new(&mut rng, 6, 10, 5, 8);
    let vis: Vec<Vec<f64>> = (0..3).map(|_| (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let v: Vec<&[f64]> = vis.iter().map(Vec::as_slice).collect();
    let (_, g) = grnn.loss_and_grad(&v, &t, true).map_err(|e| e.to_string())?;
    let rep = check(&grnn, &g.unwrap(), EPS, |m: &GrnnModel| m.loss_and_grad(&v, &t, false).unwrap().0);
    worst.push(("grnn", rep.max_rel_error));

    let summary: Vec<String> = worst.iter().map(|(n, e)| format!("{n}={e:.1e}")).collect();
    for (n, e) in &worst {
        ensure(*e < TOL, || format!("{n} max relative error {e:.3e}"))?;
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(summary.join(" "))
}

struct Overfit {
    first_total: f64,
    last_total: f64,
    first_la: f64,
    last_la: f64,
    exact: usize,
    n: usize,
    bleu: f64,
    elapsed: Duration,
}

/// Learning rate of the overfit run; every other setting is the default.
const OVERFIT_LR: f64 = 1e-3;

fn overfit_run() -> Result<Overfit, String> {
    let start = Instant::now();
    let toy = make_toy_dataset(7, 64);
    let table = WordVectorTable::new(300);
    let vocab = build_vocab(toy.manifest.samples.iter().map(|s| &s.question), 1);
    let config = TrainConfig {
        learning_rate: OVERFIT_LR,
        epochs: 200,
        ..TrainConfig::default()
    };
    let stores = Stores { visual: &toy.store, words: &table };
    let out = train_olra(&toy.manifest, stores, &vocab, &config, |_, _| Ok(())).map_err(|e| e.to_string())?;
    let mut exact = 0;
    let mut pairs = Vec::new();
    for (i, s) in toy.manifest.samples.iter().enumerate() {
        let input = olra_input(s, i, &toy.store, &table, true).map_err(|e| e.to_string())?;
        let ids = out.model.generate(&input, config.max_len, 1).map_err(|e| e.to_string())?;
        let got = decode_ids(&ids, &vocab).map_err(|e| e.to_string())?;
        let want = decode_ids(&encode_question(&s.question, &vocab, config.max_len), &vocab).unwrap();
        exact += usize::from(got == want);
        pairs.push(EvalPair::single(got, want));
    }
    let (first, last) = (&out.log[0], out.log.last().unwrap());
    Ok(Overfit {
        first_total: first.total,
        last_total: last.total,
        first_la: first.l_a,
        last_la: last.l_a,
        exact,
        n: pairs.len(),
        bleu: bleu_corpus(&pairs, 4),
        elapsed: start.elapsed(),
    })
}

fn criterion_4(run: &Result<Overfit, String>) -> Outcome {
    let r = run.as_ref().map_err(Clone::clone)?;
    let detail = format!(
        "lr={OVERFIT_LR} total {:.4} -> {:.4} ({:.1}%), exact {}/{}, train BLEU-4 {:.4}, {:.0?}",
        r.first_total,
        r.last_total,
        100.0 * r.last_total / r.first_total,
        r.exact,
        r.n,
        r.bleu,
        r.elapsed
    );
    ensure(r.last_total < 0.1 * r.first_total, || format!("loss did not drop below 10%: {detail}"))?;
    ensure(r.exact * 10 >= r.n * 9, || format!("too few exact reproductions: {detail}"))?;
    ensure(r.bleu >= 0.9, || format!("train BLEU-4 below 0.9: {detail}"))?;
    within(r.elapsed, Duration::from_secs(600))?;
    Ok(detail)
}

fn criterion_5(run: &Result<Overfit, String>) -> Outcome {
    let r = run.as_ref().map_err(Clone::clone)?;
    ensure(r.last_la <= 0.5 * r.first_la, || format!("l_a {:.4} -> {:.4}", r.first_la, r.last_la))?;
    let toy = make_toy_dataset(7, 64);
    let table = WordVectorTable::new(300);
    let vocab = build_vocab(toy.manifest.samples.iter().map(|s| &s.question), 1);
    let config = TrainConfig {
        lambda: 0.0,
        epochs: 5,
        learning_rate: OVERFIT_LR,
        ..TrainConfig::default()
    };
    let stores = Stores { visual: &toy.store, words: &table };
    let out = train_olra(&toy.manifest, stores, &vocab, &config, |_, _| Ok(())).map_err(|e| e.to_string())?;
    for l in &out.log {
        ensure(l.total == l.l_q, || format!("epoch {}: total {} != l_q {}", l.epoch, l.total, l.l_q))?;
    }
    Ok(format!(
        "l_a {:.4} -> {:.4} ({:.1}%), lambda=0 total == l_q over {} epochs",
        r.first_la,
        r.last_la,
        100.0 * r.last_la / r.first_la,
        out.log.len()
    ))
}

fn cli(args: &[&str]) -> Result<(), String> {
    let mut full = vec!["textvqg"];
    full.extend_from_slice(args);
    run_from(full).map_err(|e| format!("{}: {e}", args.join(" ")))
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

fn criterion_6() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = tmp.path().join("data");
    let out = tmp.path().join("ablation");
    cli(&["prepare", "--dataset", "toy", "--out", p(&data), "--seed", "7", "--n", "64"])?;
    cli(&["ablate", "--data", p(&data), "--out", p(&out), "--seed", "7", "--epochs", "4", "--learning-rate", "1e-3"])?;
    let result: AblationResult =
        serde_json::from_str(&fs::read_to_string(out.join("ablation.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let labels: Vec<&str> = result.rows.iter().map(|r| r.label.as_str()).collect();
    ensure(labels == ["w/o position", "w/ position", "w/ position + OCR-consistency"], || format!("rows {labels:?}"))?;
    let lambdas: Vec<f64> = result.rows.iter().map(|r| r.lambda).collect();
    ensure(lambdas == [0.0, 0.0, 0.001], || format!("lambda column {lambdas:?}"))?;
    for r in &result.rows {
        let s = r.scores.as_ref().ok_or_else(|| format!("{} has no scores", r.label))?;
        for v in [s.bleu, s.meteor, s.rouge_l].iter().chain(&s.bleu_n) {
            ensure((0.0..=1.0).contains(v), || format!("{}: score {v}", r.label))?;
        }
    }
    let md = fs::read_to_string(out.join("ablation.md")).map_err(|e| e.to_string())?;
    for row in labels.iter().chain(&["w/ 1-word answers", "w/ 2-word answers", "w/ 3-word answers"]) {
        ensure(md.lines().any(|l| l.starts_with(&format!("| {row} |"))), || format!("table lacks row '{row}':\n{md}"))?;
    }
    ensure(md.contains("| OLRA | λ | BLEU | METEOR | ROUGE-L |"), || format!("header missing:\n{md}"))?;
    for v in ["wo_position", "w_position"] {
        let log = fs::read_to_string(out.join(v).join("checkpoint/train_log.jsonl")).map_err(|e| e.to_string())?;
        for line in log.lines() {
            let e: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
            ensure(e["total"] == e["l_q"], || format!("{v}: total != l_q in {line}"))?;
        }
    }
    let full = result.rows.last().unwrap().scores.as_ref().unwrap();
    Ok(format!("3 variant rows + 3 slice rows, full model BLEU {:.4}", full.bleu))
}

fn count_records(path: &Path) -> Result<usize, String> {
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    v["data"].as_array().map(Vec::len).ok_or_else(|| format!("{} has no data array", path.display()))
}

fn criterion_7() -> Outcome {
    let Some(root) = std::env::var_os("TEXTVQG_DATA_DIR").map(PathBuf::from) else {
        return Ok("skipped: TEXTVQG_DATA_DIR is not set".into());
    };
    let targets = [
        (Source::Stvqa, "stvqa", Split::Train, 22_162usize),
        (Source::Stvqa, "stvqa", Split::Test, 3_910),
        (Source::Textvqa, "textvqa", Split::Train, 25_786),
        (Source::Textvqa, "textvqa", Split::Test, 3_702),
    ];
    let mut notes = Vec::new();
    for (source, dir, split, want) in targets {
        let input = root.join(dir);
        let (ann_names, _) = textvqg::cli::commands::official_file_names(source, split);
        let Some(ann) = ann_names.iter().map(|n| input.join(n)).find(|p| p.exists()) else {
            notes.push(format!("{dir}/{split} absent"));
            continue;
        };
        let ing = textvqg::cli::commands::ingest_official(source, &input, split).map_err(|e| e.to_string())?;
        let total = count_records(&ann)?;
        let got = ing.manifest.len();
        ensure(got + ing.skipped.len() == total, || {
            format!("{dir}/{split}: {got} kept + {} skipped != {total} records", ing.skipped.len())
        })?;
        let diff = (got as f64 - want as f64) / want as f64;
        ensure(diff.abs() <= 0.05, || format!("{dir}/{split}: {got} questions vs {want} ({:+.1}%)", 100.0 * diff))?;
        notes.push(format!("{dir}/{split} {got} vs {want} ({:+.1}%)", 100.0 * diff));
    }
    Ok(notes.join(", "))
}

fn hash_tree(root: &Path) -> BTreeMap<String, String> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, String>) {
        let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(&p, root, out);
            } else {
                let digest = Sha256::digest(fs::read(&p).unwrap());
                let rel = p.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, digest.iter().map(|b| format!("{b:02x}")).collect());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn pipeline(root: &Path) -> Result<(), String> {
    let data = root.join("data");
    cli(&["prepare", "--dataset", "toy", "--out", p(&data), "--seed", "3", "--n", "12"])?;
    for model in ["olra", "melm", "seq2seq", "grnn"] {
        let ckpt = root.join(model);
        cli(&["train", "--model", model, "--data", p(&data), "--out", p(&ckpt), "--seed", "3", "--epochs", "2"])?;
        let pred = root.join(format!("{model}_pred.jsonl"));
        cli(&["generate", "--checkpoint", p(&ckpt), "--data", p(&data), "--out", p(&pred), "--beam", "2"])?;
        let report = root.join(format!("{model}_report.json"));
        cli(&["evaluate", "--pred", p(&pred), "--out", p(&report)])?;
        let doc = root.join(format!("{model}_report.md"));
        cli(&["report", "--in", p(&report), "--format", "md", "--out", p(&doc)])?;
    }
    cli(&["ablate", "--data", p(&data), "--out", p(&root.join("ablation")), "--seed", "3", "--epochs", "2"])
}

fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path().join("run");
    pipeline(&root)?;
    let first = hash_tree(&root);
    fs::remove_dir_all(&root).map_err(|e| e.to_string())?;
    pipeline(&root)?;
    let second = hash_tree(&root);
    ensure(first.keys().eq(second.keys()), || "reruns wrote different file sets".into())?;
    let differing: Vec<&String> = first.iter().filter(|(k, v)| second[*k] != **v).map(|(k, _)| k).collect();
    ensure(differing.is_empty(), || format!("files differ between reruns: {differing:?}"))?;
    let kinds = ["manifest_", "train_log.jsonl", "params.bin", "_report.json", "ablation.json"];
    for k in kinds {
        ensure(first.keys().any(|p| p.contains(k)), || format!("no {k} artifact compared"))?;
    }
    Ok(format!("{} files byte-identical across reruns", first.len()))
}

fn finite_f32(rng: &mut ChaCha8Rng) -> f32 {
    loop {
        let f = f32::from_bits(rng.gen());
        if f.is_finite() {
            return f;
        }
    }
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for i in 0..100 {
        let records = match i {
            0 => 0,
            1 => 1,
            _ => rng.gen_range(0..20),
        };
        let dim = rng.gen_range(1..64);
        let mut store = FeatureStore::new(dim);
        for r in 0..records {
            let v: Vec<f32> = (0..dim).map(|_| finite_f32(&mut rng)).collect();
            store.insert(format!("img-{i}-{r}"), &v).map_err(|e| e.to_string())?;
        }
        let dir = tmp.path().join(format!("store-{i}"));
        store.write(&dir).map_err(|e| e.to_string())?;
        let back = FeatureStore::read(&dir).map_err(|e| e.to_string())?;
        let bits = |s: &FeatureStore| s.payload().iter().map(|f| f.to_bits()).collect::<Vec<_>>();
        ensure(back.dim() == dim && back.records() == store.records() && bits(&back) == bits(&store), || {
            format!("store {i} ({records} records, dim {dim}) did not round-trip")
        })?;
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("100 stores in {:?}", start.elapsed()))
}

fn guarded<F: FnOnce() -> Outcome>(f: F) -> Outcome {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(e) => Err(e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    }
}

fn main() -> ExitCode {
    let run = panic::catch_unwind(overfit_run).unwrap_or_else(|_| Err("overfit run panicked".into()));
    let criteria: Vec<Criterion<'_>> = vec![
        ("metric oracle suite", Box::new(criterion_1)),
        ("metric property suite", Box::new(criterion_2)),
        ("gradient check", Box::new(criterion_3)),
        ("overfit test", Box::new(|| criterion_4(&run))),
        ("consistency-loss behavior", Box::new(|| criterion_5(&run))),
        ("ablation harness", Box::new(criterion_6)),
        ("dataset ingestion (conditional)", Box::new(criterion_7)),
        ("determinism", Box::new(criterion_8)),
        ("feature-store round trip", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        match guarded(f) {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {e}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
