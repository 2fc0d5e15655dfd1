use crate::axes::{Record, Shape};
use crate::error::Result;
use crate::lang;
use crate::ops::{contract, index_select, rename, DEFAULT_EPSILON};
use crate::rng::SplitMix64;
use crate::tensor::NamedTensor;

use super::applications::{bayes, beam_step, cbow, kmeans_step, mvn_density, sudoku_check};
use super::blocks::{
    attention, batchnorm, conv1d, conv2d, feedforward, full_conn, groupnorm, instancenorm, layernorm, maxpool2d,
    rnn_elman, Affine, Dense, Elman,
};
use super::lenet::{lenet, lenet_unflattened, LeNetConfig, LeNetParams};
use super::oracle::{self, NormKind, TransformerLayerData};
use super::transformer::{transformer_lm, transformer_program, TransformerConfig, TransformerParams};

fn shape(axes: &[(&str, usize)]) -> Result<Shape> {
    Shape::new(axes.iter().copied())
}

fn uniform(rng: &mut SplitMix64, axes: &[(&str, usize)]) -> Result<NamedTensor> {
    Ok(rng.tensor(shape(axes)?, -1.0, 1.0))
}

fn positive(rng: &mut SplitMix64, axes: &[(&str, usize)]) -> Result<NamedTensor> {
    Ok(rng.tensor(shape(axes)?, 0.1, 1.0))
}

fn ordered(t: &NamedTensor, order: &[&str]) -> Result<Vec<f64>> {
    t.to_ordered(order)
}

/// Max absolute difference; infinite when lengths differ.
fn deviation(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn tensor_deviation(a: &NamedTensor, b: &NamedTensor) -> f64 {
    a.max_abs_diff(b).unwrap_or(f64::INFINITY)
}

/// One-hot over `{seq, vocab}` from 0-based token ids.
fn one_hot(tokens: &[usize], vocab: usize) -> Result<NamedTensor> {
    let s = shape(&[("seq", tokens.len()), ("vocab", vocab)])?;
    Ok(NamedTensor::from_fn(s, |r| {
        let (p, v) = (r.get("seq").unwrap_or(0), r.get("vocab").unwrap_or(0));
        if tokens[p - 1] + 1 == v {
            1.0
        } else {
            0.0
        }
    }))
}

pub(super) fn feedforward_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let sizes = [("inp", 4), ("hidden1", 3), ("hidden2", 3), ("out", 2)];
    let x = uniform(&mut rng, &sizes[..1])?;
    let mut layers = Vec::new();
    for w in sizes.windows(2) {
        layers.push(Dense {
            weight: uniform(&mut rng, &[w[1], w[0]])?,
            bias: uniform(&mut rng, &[w[1]])?,
        });
    }
    let layers: [Dense; 3] = layers.try_into().expect("three layers");
    let y = feedforward(&x, &layers)?;
    let mut loops = Vec::new();
    for (l, w) in layers.iter().zip(sizes.windows(2)) {
        loops.push((ordered(&l.weight, &[w[1].0, w[0].0])?, l.bias.data().to_vec()));
    }
    let expect = oracle::mlp(x.data(), &loops);

    // The same network with every layer over `layer` and `layer'`.
    let mut h = rename(&x, "inp", "layer")?;
    for (l, w) in layers.iter().zip(sizes.windows(2)) {
        let weight = rename(&rename(&l.weight, w[1].0, "layer'")?, w[0].0, "layer")?;
        let bias = rename(&l.bias, w[1].0, "layer'")?;
        h = full_conn(&h, &Dense { weight, bias })?;
    }
    Ok(deviation(y.data(), &expect).max(deviation(h.data(), y.data())))
}

pub(super) fn rnn_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let params = Elman {
        hidden_weight: uniform(&mut rng, &[("hidden", 2), ("hidden'", 2)])?,
        input_weight: uniform(&mut rng, &[("inp", 2), ("hidden'", 2)])?,
        bias: uniform(&mut rng, &[("hidden'", 2)])?,
    };
    let h0 = uniform(&mut rng, &[("hidden", 2)])?;
    let xs: Vec<NamedTensor> = (0..3)
        .map(|_| uniform(&mut rng, &[("inp", 2)]))
        .collect::<Result<_>>()?;
    let states = rnn_elman(&xs, &params, &h0)?;
    let expect = oracle::rnn(
        &xs.iter().map(|x| x.data().to_vec()).collect::<Vec<_>>(),
        &ordered(&params.hidden_weight, &["hidden", "hidden'"])?,
        &ordered(&params.input_weight, &["inp", "hidden'"])?,
        params.bias.data(),
        h0.data(),
    );
    Ok(states
        .iter()
        .zip(&expect)
        .map(|(s, e)| deviation(s.data(), e))
        .fold(0.0, f64::max))
}

/// Queries with extra `seq'`, `heads` and `batch` axes against a loop over
/// every combination.
pub(super) fn attention_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let (seq, key, val) = (4, 3, 2);
    let q = uniform(&mut rng, &[("batch", 2), ("heads", 2), ("seq'", 3), ("key", key)])?;
    let k = uniform(&mut rng, &[("heads", 2), ("seq", seq), ("key", key)])?;
    let v = uniform(&mut rng, &[("heads", 2), ("seq", seq), ("val", val)])?;
    let y = attention(&q, &k, &v, None)?;
    let qd = ordered(&q, &["batch", "heads", "seq'", "key"])?;
    let kd = ordered(&k, &["heads", "seq", "key"])?;
    let vd = ordered(&v, &["heads", "seq", "val"])?;
    let mut expect = Vec::new();
    for b in 0..2 {
        for h in 0..2 {
            for s in 0..3 {
                let qi = &qd[((b * 2 + h) * 3 + s) * key..][..key];
                let kh = &kd[h * seq * key..][..seq * key];
                let vh = &vd[h * seq * val..][..seq * val];
                expect.extend(oracle::attention(qi, kh, vh, None, seq));
            }
        }
    }
    Ok(deviation(&ordered(&y, &["batch", "heads", "seq'", "val"])?, &expect))
}

/// Causal self-attention mask: query `j` attends to keys `1..=j`.
pub(super) fn masked_attention_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let (seq, key, val) = (4, 3, 2);
    let q = uniform(&mut rng, &[("seq'", seq), ("key", key)])?;
    let k = uniform(&mut rng, &[("seq", seq), ("key", key)])?;
    let v = uniform(&mut rng, &[("seq", seq), ("val", val)])?;
    let mask = super::transformer::causal_mask(seq)?;
    let y = attention(&q, &k, &v, Some(&mask))?;
    let qd = ordered(&q, &["seq'", "key"])?;
    let kd = ordered(&k, &["seq", "key"])?;
    let vd = ordered(&v, &["seq", "val"])?;
    let mut expect = Vec::new();
    for j in 0..seq {
        let m: Vec<f64> = (0..seq).map(|i| if i <= j { 0.0 } else { f64::NEG_INFINITY }).collect();
        expect.extend(oracle::attention(&qd[j * key..][..key], &kd, &vd, Some(&m), seq));
    }
    Ok(deviation(&ordered(&y, &["seq'", "val"])?, &expect))
}

pub(super) fn conv_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    // Single channel in and out.
    let x = uniform(&mut rng, &[("chans", 1), ("height", 5), ("width", 5)])?;
    let w = uniform(&mut rng, &[("chans", 1), ("kh", 3), ("kw", 3)])?;
    let b = NamedTensor::scalar(rng.uniform(-1.0, 1.0));
    let y = conv2d(&x, &w, &b)?;
    let expect = oracle::conv2d(x.data(), (1, 5, 5), w.data(), (1, 3, 3), b.data());
    let mut worst = deviation(&ordered(&y, &["height", "width"])?, &expect);

    // Several channels in and out.
    let x = uniform(&mut rng, &[("chans", 2), ("height", 6), ("width", 5)])?;
    let w = uniform(&mut rng, &[("chans'", 3), ("chans", 2), ("kh", 2), ("kw", 3)])?;
    let b = uniform(&mut rng, &[("chans'", 3)])?;
    let y = conv2d(&x, &w, &b)?;
    let expect = oracle::conv2d(
        &ordered(&x, &["chans", "height", "width"])?,
        (2, 6, 5),
        &ordered(&w, &["chans'", "chans", "kh", "kw"])?,
        (3, 2, 3),
        b.data(),
    );
    worst = worst.max(deviation(&ordered(&y, &["chans'", "height", "width"])?, &expect));

    // One-dimensional, as a convolution of height 1.
    let x = uniform(&mut rng, &[("chans", 2), ("seq", 7)])?;
    let w = uniform(&mut rng, &[("chans", 2), ("kernel", 3)])?;
    let y = conv1d(&x, &w, &NamedTensor::scalar(0.0))?;
    let expect = oracle::conv2d(
        &ordered(&x, &["chans", "seq"])?,
        (2, 1, 7),
        &ordered(&w, &["chans", "kernel"])?,
        (1, 1, 3),
        &[0.0],
    );
    Ok(worst.max(deviation(y.data(), &expect)))
}

pub(super) fn maxpool_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let x = uniform(&mut rng, &[("chans", 2), ("height", 4), ("width", 6)])?;
    let y = maxpool2d(&x, 2, 2)?;
    let expect = oracle::maxpool2d(&ordered(&x, &["chans", "height", "width"])?, (2, 4, 6), 2);
    Ok(deviation(&ordered(&y, &["chans", "height", "width"])?, &expect))
}

fn norm_fixture(seed: u64, kind: NormKind) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let dims = (3, 4, 5);
    let x = rng.tensor(
        shape(&[("batch", dims.0), ("chans", dims.1), ("layer", dims.2)])?,
        -2.0,
        3.0,
    );
    let params: &[(&str, usize)] = if kind == NormKind::Layer {
        &[("chans", 4), ("layer", 5)]
    } else {
        &[("chans", 4)]
    };
    let affine = Affine {
        scale: uniform(&mut rng, params)?,
        shift: uniform(&mut rng, params)?,
    };
    let y = match kind {
        NormKind::Batch => batchnorm(&x, &affine)?,
        NormKind::Instance => instancenorm(&x, &affine)?,
        NormKind::Layer => layernorm(&x, &affine)?,
        NormKind::Group(k) => groupnorm(&x, k, &affine)?,
    };
    let order = ["batch", "chans", "layer"];
    let expect = oracle::norm(
        &ordered(&x, &order)?,
        dims,
        kind,
        affine.scale.data(),
        affine.shift.data(),
        DEFAULT_EPSILON,
    );
    Ok(deviation(&ordered(&y, &order)?, &expect))
}

pub(super) fn batchnorm_fixture(seed: u64) -> Result<f64> {
    norm_fixture(seed, NormKind::Batch)
}

pub(super) fn instancenorm_fixture(seed: u64) -> Result<f64> {
    norm_fixture(seed, NormKind::Instance)
}

pub(super) fn layernorm_fixture(seed: u64) -> Result<f64> {
    norm_fixture(seed, NormKind::Layer)
}

pub(super) fn groupnorm_fixture(seed: u64) -> Result<f64> {
    norm_fixture(seed, NormKind::Group(2))
}

fn transformer_inputs(seed: u64, config: &TransformerConfig) -> Result<(TransformerParams, Vec<usize>)> {
    let mut rng = SplitMix64::new(seed);
    let params = TransformerParams::random(config, &mut rng)?;
    let tokens = (0..config.seq).map(|_| rng.below(config.vocab)).collect();
    Ok((params, tokens))
}

pub(super) fn transformer_fixture(seed: u64) -> Result<f64> {
    let config = TransformerConfig::default();
    let (params, tokens) = transformer_inputs(seed, &config)?;
    let out = transformer_lm(&one_hot(&tokens, config.vocab)?, &params)?;
    let mut layers = Vec::new();
    for p in &params.layers {
        layers.push(TransformerLayerData {
            wq: ordered(&p.query, &["heads", "layer", "key"])?,
            wk: ordered(&p.key, &["heads", "layer", "key"])?,
            wv: ordered(&p.value, &["heads", "layer", "val"])?,
            wo: ordered(&p.output, &["heads", "val", "layer"])?,
            g_att: p.attention_norm.scale.data().to_vec(),
            b_att: p.attention_norm.shift.data().to_vec(),
            w1: ordered(&p.w1, &["hidden", "layer"])?,
            b1: p.b1.data().to_vec(),
            w2: ordered(&p.w2, &["layer", "hidden"])?,
            b2: p.b2.data().to_vec(),
            g_ffn: p.ffn_norm.scale.data().to_vec(),
            b_ffn: p.ffn_norm.shift.data().to_vec(),
        });
    }
    let e = ordered(&params.embedding, &["vocab", "layer"])?;
    let expect = oracle::transformer(&tokens, &e, config.vocab, config.heads, &layers, DEFAULT_EPSILON);
    Ok(deviation(&ordered(&out, &["seq", "vocab"])?, &expect))
}

/// The generated program, evaluated by the language runtime, against the
/// library implementation on the same parameters.
pub(super) fn transformer_program_fixture(seed: u64) -> Result<f64> {
    let config = TransformerConfig::default();
    let (params, tokens) = transformer_inputs(seed, &config)?;
    let input = one_hot(&tokens, config.vocab)?;
    let expect = transformer_lm(&input, &params)?;
    let source = transformer_program(&config, &input)?;
    let program = match lang::parse(&source) {
        Ok(p) => p,
        Err(_) => return Ok(f64::INFINITY),
    };
    match lang::evaluate(&program, seed) {
        Ok(eval) => Ok(eval
            .values
            .get("O")
            .map_or(f64::INFINITY, |o| tensor_deviation(o, &expect))),
        Err(_) => Ok(f64::INFINITY),
    }
}

pub(super) fn lenet_fixture(seed: u64) -> Result<f64> {
    let c = LeNetConfig::default();
    let mut rng = SplitMix64::new(seed);
    let p = LeNetParams::random(&c, &mut rng)?;
    let x = uniform(
        &mut rng,
        &[
            ("batch", c.batch),
            ("chans", c.chans[0]),
            ("height", c.side),
            ("width", c.side),
        ],
    )?;
    let out = lenet(&x, &p, c.pool)?;
    let alt = lenet_unflattened(&x, &p, c.pool)?;
    let xd = ordered(&x, &["batch", "chans", "height", "width"])?;
    let w1 = ordered(&p.conv[0].0, &["chans'", "chans", "kh", "kw"])?;
    let w2 = ordered(&p.conv[1].0, &["chans'", "chans", "kh", "kw"])?;
    let w3 = ordered(&p.w3, &["hidden", "height", "width", "chans"])?;
    let w4 = ordered(&p.w4, &["classes", "hidden"])?;
    let image = c.chans[0] * c.side * c.side;
    let mut expect = Vec::new();
    for b in 0..c.batch {
        expect.extend(oracle::lenet(
            &xd[b * image..][..image],
            c.chans,
            c.side,
            c.kernel,
            c.pool,
            [(&w1, p.conv[0].1.data()), (&w2, p.conv[1].1.data())],
            &w3,
            p.b3.data(),
            &w4,
            p.b4.data(),
        ));
    }
    let got = ordered(&out, &["batch", "classes"])?;
    Ok(deviation(&got, &expect).max(tensor_deviation(&out, &alt)))
}

pub(super) fn bayes_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let raw = positive(&mut rng, &[("A", 3), ("B", 2)])?;
    let rows: Vec<f64> = raw
        .data()
        .chunks(2)
        .flat_map(|r| {
            let s: f64 = r.iter().sum();
            r.iter().map(move |v| v / s).collect::<Vec<_>>()
        })
        .collect();
    let b_given_a = NamedTensor::new(raw.shape().clone(), rows)?;
    let raw = positive(&mut rng, &[("A", 3)])?;
    let total: f64 = raw.data().iter().sum();
    let a = raw.map(|v| v / total);
    let out = bayes(&b_given_a, &a)?;
    let (joint, marginal, posterior) = oracle::bayes(&ordered(&b_given_a, &["A", "B"])?, a.data());
    let mut worst = deviation(&ordered(&out.joint, &["A", "B"])?, &joint)
        .max(deviation(out.marginal.data(), &marginal))
        .max(deviation(&ordered(&out.posterior, &["A", "B"])?, &posterior));
    // Posterior sums to one over A, joint sums to the prior over B.
    let post = ordered(&out.posterior, &["B", "A"])?;
    for col in post.chunks(3) {
        worst = worst.max((col.iter().sum::<f64>() - 1.0).abs());
    }
    let joint_rows = ordered(&out.joint, &["A", "B"])?;
    for (row, p) in joint_rows.chunks(2).zip(a.data()) {
        worst = worst.max((row.iter().sum::<f64>() - p).abs());
    }
    Ok(worst)
}

/// Embedding lookup and gather through `index`.
pub(super) fn indexing_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let (n, emb, seq) = (5, 3, 4);
    let e = uniform(&mut rng, &[("vocab", n), ("emb", emb)])?;
    let p = uniform(&mut rng, &[("seq", seq), ("vocab", n)])?;
    let ids: Vec<usize> = (0..seq).map(|_| 1 + rng.below(n)).collect();
    let i = NamedTensor::new(shape(&[("seq", seq)])?, ids.iter().map(|&v| v as f64).collect())?;
    let words = index_select(&e, "vocab", &i)?;
    let probs = index_select(&p, "vocab", &i)?;
    let ed = ordered(&e, &["vocab", "emb"])?;
    let pd = ordered(&p, &["seq", "vocab"])?;
    let mut expect_words = Vec::new();
    let mut expect_probs = Vec::new();
    for (s, &id) in ids.iter().enumerate() {
        expect_words.extend_from_slice(&ed[(id - 1) * emb..][..emb]);
        expect_probs.push(pd[s * n + id - 1]);
    }
    let single = index_select(&e, "vocab", &NamedTensor::scalar(ids[0] as f64))?;
    let partial = e.partial_index(&Record::new([("vocab", ids[0])])?)?;
    Ok(deviation(&ordered(&words, &["seq", "emb"])?, &expect_words)
        .max(deviation(probs.data(), &expect_probs))
        .max(tensor_deviation(&single, &partial)))
}

pub(super) fn cbow_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let (vocab, emb, classes, seq) = (6, 3, 3, 4);
    let e = uniform(&mut rng, &[("vocab", vocab), ("emb", emb)])?;
    let w = uniform(&mut rng, &[("classes", classes), ("emb", emb)])?;
    let tokens: Vec<usize> = (0..seq).map(|_| rng.below(vocab)).collect();
    let out = cbow(&one_hot(&tokens, vocab)?, &e, &w)?;
    let expect = oracle::cbow(
        &tokens,
        &ordered(&e, &["vocab", "emb"])?,
        &ordered(&w, &["classes", "emb"])?,
        emb,
    );
    let mut reversed = tokens.clone();
    reversed.reverse();
    let permuted = cbow(&one_hot(&reversed, vocab)?, &e, &w)?;
    Ok(deviation(out.data(), &expect).max(tensor_deviation(&out, &permuted)))
}

/// A solved grid, relabelled and shuffled within bands and stacks.
fn sudoku_grid(rng: &mut SplitMix64) -> [[u8; 9]; 9] {
    let mut digits: Vec<u8> = (1..=9).collect();
    for i in (1..9).rev() {
        digits.swap(i, rng.below(i + 1));
    }
    let shuffle3 = |rng: &mut SplitMix64| {
        let mut p = [0, 1, 2];
        for i in (1..3).rev() {
            p.swap(i, rng.below(i + 1));
        }
        p
    };
    let bands = shuffle3(rng);
    let rows: Vec<usize> = bands.iter().flat_map(|&b| shuffle3(rng).map(|r| b * 3 + r)).collect();
    let stacks = shuffle3(rng);
    let cols: Vec<usize> = stacks.iter().flat_map(|&s| shuffle3(rng).map(|c| s * 3 + c)).collect();
    let mut grid = [[0u8; 9]; 9];
    for (r, row) in grid.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            let (br, bc) = (rows[r], cols[c]);
            *v = digits[(br * 3 + br / 3 + bc) % 9];
        }
    }
    grid
}

fn sudoku_tensor(grid: &[[u8; 9]; 9]) -> Result<NamedTensor> {
    let s = shape(&[("height", 9), ("width", 9), ("assign", 9)])?;
    Ok(NamedTensor::from_fn(s, |r| {
        let (h, w, a) = (
            r.get("height").unwrap_or(0),
            r.get("width").unwrap_or(0),
            r.get("assign").unwrap_or(0),
        );
        if grid[h - 1][w - 1] as usize == a {
            1.0
        } else {
            0.0
        }
    }))
}

/// A valid grid is accepted; swapping two cells of a row is rejected.
pub(super) fn sudoku_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let grid = sudoku_grid(&mut rng);
    let mut broken = grid;
    let row = rng.below(9);
    let a = rng.below(9);
    let b = (a + 1 + rng.below(8)) % 9;
    broken[row].swap(a, b);
    let mut worst = 0.0f64;
    for (g, want) in [(grid, 1.0), (broken, 0.0)] {
        let got = sudoku_check(&sudoku_tensor(&g)?)?;
        let loops = if oracle::sudoku(&g) { 1.0 } else { 0.0 };
        worst = worst.max((got - want).abs()).max((got - loops).abs());
    }
    Ok(worst)
}

pub(super) fn kmeans_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let x = uniform(&mut rng, &[("batch", 6), ("d", 2)])?;
    let mut c = uniform(&mut rng, &[("clusters", 2), ("d", 2)])?;
    let step = kmeans_step(&x, &c)?;
    let (assign, centers) = oracle::kmeans(&ordered(&x, &["batch", "d"])?, &ordered(&c, &["clusters", "d"])?, 2);
    let hot: Vec<f64> = assign
        .iter()
        .flat_map(|&j| (0..2).map(move |k| if k == j { 1.0 } else { 0.0 }))
        .collect();
    let mut worst = deviation(&ordered(&step.assignments, &["batch", "clusters"])?, &hot)
        .max(deviation(&ordered(&step.centers, &["clusters", "d"])?, &centers));
    // Iterate to the fixed point, where a further step changes nothing.
    for _ in 0..50 {
        let next = kmeans_step(&x, &c)?.centers;
        if next == c {
            break;
        }
        c = next;
    }
    worst = worst.max(tensor_deviation(&kmeans_step(&x, &c)?.centers, &c));
    Ok(worst)
}

/// Scores and one-hot states from a linear transition, against exhaustive
/// enumeration; then the same step with a batch axis.
pub(super) fn beam_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let (states, beam) = (5, 2);
    let transition = positive(&mut rng, &[("state", states), ("state'", states)])?;
    let f = |s: &NamedTensor| rename(&contract(s, &transition, &["state"])?, "state'", "state");
    let h = positive(&mut rng, &[("batch", 2), ("beam", beam)])?;
    let s = rng.one_hot(shape(&[("batch", 2), ("beam", beam), ("state", states)])?, "state");
    let (h2, s2) = beam_step(&h, &s, f, beam)?;
    let hd = ordered(&h, &["batch", "beam"])?;
    let sd = ordered(&s, &["batch", "beam", "state"])?;
    let td = ordered(&transition, &["state", "state'"])?;
    let mut worst = 0.0f64;
    for b in 0..2 {
        let mut gain = Vec::new();
        for k in 0..beam {
            let current = (0..states)
                .find(|&i| sd[(b * beam + k) * states + i] == 1.0)
                .unwrap_or(0);
            gain.extend_from_slice(&td[current * states..][..states]);
        }
        let best = oracle::beam(&hd[b * beam..][..beam], &gain, beam);
        let slice = Record::new([("batch", b + 1)])?;
        let scores = h2.partial_index(&slice)?;
        let picks = ordered(&s2.partial_index(&slice)?, &["beam", "state"])?;
        for (k, (score, state)) in best.iter().enumerate() {
            worst = worst.max((scores.data()[k] - score).abs());
            let hot: Vec<f64> = (0..states).map(|i| if i == *state { 1.0 } else { 0.0 }).collect();
            worst = worst.max(deviation(&picks[k * states..][..states], &hot));
        }
        // Unbatched step on this slice.
        let (hb, sb) = beam_step(&h.partial_index(&slice)?, &s.partial_index(&slice)?, f, beam)?;
        worst = worst
            .max(tensor_deviation(&hb, &scores))
            .max(tensor_deviation(&sb, &s2.partial_index(&slice)?));
    }
    Ok(worst)
}

/// A random symmetric positive-definite matrix over `{d1, d2}`.
fn covariance(rng: &mut SplitMix64, n: usize) -> Result<NamedTensor> {
    let a = uniform(rng, &[("d1", n), ("d", n)])?;
    let gram = contract(&a, &rename(&a, "d1", "d2")?, &["d"])?;
    let eye = NamedTensor::from_fn(shape(&[("d1", n), ("d2", n)])?, |r| {
        if r.get("d1") == r.get("d2") {
            0.5
        } else {
            0.0
        }
    });
    crate::ops::add(&gram, &eye)
}

pub(super) fn mvn_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let n = 3;
    let cov = covariance(&mut rng, n)?;
    let mean = uniform(&mut rng, &[("d", n)])?;
    let x = uniform(&mut rng, &[("batch", 4), ("d", n)])?;
    let p = mvn_density(&x, &mean, &cov)?;
    let xd = ordered(&x, &["batch", "d"])?;
    let cd = ordered(&cov, &["d1", "d2"])?;
    let expect: Vec<f64> = xd.chunks(n).map(|row| oracle::mvn(row, mean.data(), &cd)).collect();
    Ok(deviation(p.data(), &expect))
}

/// Riemann sum of the density over a grid covering ±6 standard deviations.
pub(super) fn mvn_grid_fixture(seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let cov = covariance(&mut rng, 2)?;
    let mean = uniform(&mut rng, &[("d", 2)])?;
    let steps = 80;
    let cd = ordered(&cov, &["d1", "d2"])?;
    let lo: Vec<f64> = (0..2).map(|i| mean.data()[i] - 6.0 * cd[i * 3].sqrt()).collect();
    let width: Vec<f64> = (0..2).map(|i| 12.0 * cd[i * 3].sqrt() / steps as f64).collect();
    let points = shape(&[("point", steps * steps), ("d", 2)])?;
    let x = NamedTensor::from_fn(points, |r| {
        let (p, i) = (r.get("point").unwrap_or(1) - 1, r.get("d").unwrap_or(1) - 1);
        let along = if i == 0 { p / steps } else { p % steps };
        lo[i] + (along as f64 + 0.5) * width[i]
    });
    let p = mvn_density(&x, &mean, &cov)?;
    let mass: f64 = p.data().iter().sum::<f64>() * width[0] * width[1];
    Ok((mass - 1.0).abs())
}
