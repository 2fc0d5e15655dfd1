//! Reference implementations with explicit loops over row-major buffers.
//!
//! Nothing here touches named tensors; callers lay inputs out with
//! [`NamedTensor::to_ordered`](crate::NamedTensor::to_ordered) in the axis
//! order each function documents.

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// `out[i] = f(Σ_j w[i][j] x[j] + b[i])` with `w` laid out `[rows][cols]`.
pub fn affine(w: &[f64], x: &[f64], b: &[f64], f: fn(f64) -> f64) -> Vec<f64> {
    let cols = x.len();
    (0..b.len())
        .map(|i| f((0..cols).map(|j| w[i * cols + j] * x[j]).sum::<f64>() + b[i]))
        .collect()
}

/// Sigmoid multilayer perceptron; each layer is `(weight [out][in], bias)`.
pub fn mlp(x: &[f64], layers: &[(Vec<f64>, Vec<f64>)]) -> Vec<f64> {
    layers.iter().fold(x.to_vec(), |h, (w, b)| affine(w, &h, b, sigmoid))
}

/// Elman recurrence: `wh [hidden][hidden']`, `wi [inp][hidden']`.
pub fn rnn(xs: &[Vec<f64>], wh: &[f64], wi: &[f64], b: &[f64], h0: &[f64]) -> Vec<Vec<f64>> {
    let n = h0.len();
    let mut states = vec![h0.to_vec()];
    for x in xs {
        let h = states.last().expect("initial state");
        let next = (0..n)
            .map(|o| {
                let rec: f64 = (0..n).map(|i| wh[i * n + o] * h[i]).sum();
                let inp: f64 = (0..x.len()).map(|i| wi[i * n + o] * x[i]).sum();
                sigmoid(rec + inp + b[o])
            })
            .collect();
        states.push(next);
    }
    states
}

fn softmax_in_place(v: &mut [f64]) {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in v.iter_mut() {
        *x = (*x - m).exp();
        total += *x;
    }
    for x in v.iter_mut() {
        *x /= total;
    }
}

/// Single-query attention: `q [key]`, `k [seq][key]`, `v [seq][val]`,
/// optional additive `mask [seq]`.
pub fn attention(q: &[f64], k: &[f64], v: &[f64], mask: Option<&[f64]>, seq: usize) -> Vec<f64> {
    let dk = q.len();
    let dv = v.len() / seq;
    let mut w: Vec<f64> = (0..seq)
        .map(|s| {
            let dot: f64 = (0..dk).map(|j| q[j] * k[s * dk + j]).sum();
            dot / (dk as f64).sqrt() + mask.map_or(0.0, |m| m[s])
        })
        .collect();
    softmax_in_place(&mut w);
    (0..dv).map(|o| (0..seq).map(|s| w[s] * v[s * dv + o]).sum()).collect()
}

/// Valid 2-d convolution: `x [c][h][w]`, `w [out][c][kh][kw]`, `b [out]`;
/// result `[out][h'][w']`.
pub fn conv2d(x: &[f64], dims: (usize, usize, usize), w: &[f64], kdims: (usize, usize, usize), b: &[f64]) -> Vec<f64> {
    let (c, h, wd) = dims;
    let (out, kh, kw) = kdims;
    let (oh, ow) = (h + 1 - kh, wd + 1 - kw);
    let mut y = vec![0.0; out * oh * ow];
    for o in 0..out {
        for i in 0..oh {
            for j in 0..ow {
                let mut s = b[o];
                for ch in 0..c {
                    for a in 0..kh {
                        for bb in 0..kw {
                            s += w[((o * c + ch) * kh + a) * kw + bb] * x[(ch * h + i + a) * wd + j + bb];
                        }
                    }
                }
                y[(o * oh + i) * ow + j] = s;
            }
        }
    }
    y
}

/// Non-overlapping max pooling of `x [c][h][w]` with square blocks of `k`.
pub fn maxpool2d(x: &[f64], dims: (usize, usize, usize), k: usize) -> Vec<f64> {
    let (c, h, w) = dims;
    let (oh, ow) = (h / k, w / k);
    let mut y = vec![f64::NEG_INFINITY; c * oh * ow];
    for ch in 0..c {
        for i in 0..h {
            for j in 0..w {
                let slot = &mut y[(ch * oh + i / k) * ow + j / k];
                *slot = slot.max(x[(ch * h + i) * w + j]);
            }
        }
    }
    y
}

/// Standardizes the entries of `x` listed in each group, in place.
fn standardize_groups(x: &mut [f64], groups: &[Vec<usize>], eps: f64) {
    for g in groups {
        let n = g.len() as f64;
        let mean = g.iter().map(|&i| x[i]).sum::<f64>() / n;
        let var = g.iter().map(|&i| (x[i] - mean).powi(2)).sum::<f64>() / n;
        let scale = (var + eps).sqrt();
        for &i in g {
            x[i] = (x[i] - mean) / scale;
        }
    }
}

/// Which statistics a normalization layer pools.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Batch,
    Instance,
    Layer,
    /// Channels pooled into groups of this size.
    Group(usize),
}

/// Normalization of `x [batch][chans][layer]`. `gamma` and `beta` are
/// `[chans]`, or `[chans][layer]` for [`NormKind::Layer`].
pub fn norm(x: &[f64], dims: (usize, usize, usize), kind: NormKind, gamma: &[f64], beta: &[f64], eps: f64) -> Vec<f64> {
    let (nb, nc, nl) = dims;
    let at = |b: usize, c: usize, l: usize| (b * nc + c) * nl + l;
    let mut groups = Vec::new();
    match kind {
        NormKind::Batch => {
            for c in 0..nc {
                groups.push((0..nb).flat_map(|b| (0..nl).map(move |l| at(b, c, l))).collect());
            }
        }
        NormKind::Instance => {
            for b in 0..nb {
                for c in 0..nc {
                    groups.push((0..nl).map(|l| at(b, c, l)).collect());
                }
            }
        }
        NormKind::Layer => {
            for b in 0..nb {
                groups.push((0..nc).flat_map(|c| (0..nl).map(move |l| at(b, c, l))).collect());
            }
        }
        NormKind::Group(k) => {
            for b in 0..nb {
                for g in 0..nc / k {
                    groups.push(
                        (g * k..(g + 1) * k)
                            .flat_map(|c| (0..nl).map(move |l| at(b, c, l)))
                            .collect(),
                    );
                }
            }
        }
    }
    let mut y = x.to_vec();
    standardize_groups(&mut y, &groups, eps);
    for b in 0..nb {
        for c in 0..nc {
            for l in 0..nl {
                let p = if kind == NormKind::Layer { c * nl + l } else { c };
                let i = at(b, c, l);
                y[i] = y[i] * gamma[p] + beta[p];
            }
        }
    }
    y
}

/// Per-layer Transformer weights, each laid out in the axis order given.
pub struct TransformerLayerData {
    /// `[heads][layer][key]`
    pub wq: Vec<f64>,
    /// `[heads][layer][key]`
    pub wk: Vec<f64>,
    /// `[heads][layer][val]`
    pub wv: Vec<f64>,
    /// `[heads][val][layer]`
    pub wo: Vec<f64>,
    pub g_att: Vec<f64>,
    pub b_att: Vec<f64>,
    /// `[hidden][layer]`
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `[layer][hidden]`
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub g_ffn: Vec<f64>,
    pub b_ffn: Vec<f64>,
}

fn layer_norm_rows(x: &[f64], rows: usize, d: usize, g: &[f64], b: &[f64], eps: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    let groups: Vec<Vec<usize>> = (0..rows).map(|r| (r * d..(r + 1) * d).collect()).collect();
    standardize_groups(&mut y, &groups, eps);
    for r in 0..rows {
        for i in 0..d {
            y[r * d + i] = y[r * d + i] * g[i] + b[i];
        }
    }
    y
}

/// Causal Transformer language model on token ids (0-based). `e` is
/// `[vocab][layer]`; the result is `[seq][vocab]`.
pub fn transformer(
    tokens: &[usize],
    e: &[f64],
    vocab: usize,
    heads: usize,
    layers: &[TransformerLayerData],
    eps: f64,
) -> Vec<f64> {
    let n = tokens.len();
    let d = e.len() / vocab;
    let dk = d / heads;
    let mut x = vec![0.0; n * d];
    for p in 0..n {
        for i in 0..d {
            let pe = if i % 2 == 0 {
                (p as f64 / 10000f64.powf(i as f64 / d as f64)).sin()
            } else {
                (p as f64 / 10000f64.powf((i - 1) as f64 / d as f64)).cos()
            };
            x[p * d + i] = e[tokens[p] * d + i] * (d as f64).sqrt() + pe;
        }
    }
    for w in layers {
        let mut att = vec![0.0; n * d];
        for h in 0..heads {
            let project =
                |m: &[f64], p: usize, j: usize| (0..d).map(|i| m[(h * d + i) * dk + j] * x[p * d + i]).sum::<f64>();
            let q: Vec<f64> = (0..n)
                .flat_map(|p| (0..dk).map(move |j| (p, j)))
                .map(|(p, j)| project(&w.wq, p, j))
                .collect();
            let k: Vec<f64> = (0..n)
                .flat_map(|p| (0..dk).map(move |j| (p, j)))
                .map(|(p, j)| project(&w.wk, p, j))
                .collect();
            let v: Vec<f64> = (0..n)
                .flat_map(|p| (0..dk).map(move |j| (p, j)))
                .map(|(p, j)| project(&w.wv, p, j))
                .collect();
            for p in 0..n {
                let mask: Vec<f64> = (0..n).map(|s| if s <= p { 0.0 } else { f64::NEG_INFINITY }).collect();
                let y = attention(&q[p * dk..(p + 1) * dk], &k, &v, Some(&mask), n);
                for o in 0..d {
                    att[p * d + o] += (0..dk).map(|j| w.wo[(h * dk + j) * d + o] * y[j]).sum::<f64>();
                }
            }
        }
        let normed = layer_norm_rows(&att, n, d, &w.g_att, &w.b_att, eps);
        let t: Vec<f64> = normed.iter().zip(&x).map(|(a, b)| a + b).collect();
        let mut ffn = vec![0.0; n * d];
        for p in 0..n {
            let h1 = affine(&w.w1, &t[p * d..(p + 1) * d], &w.b1, relu);
            let h2 = affine(&w.w2, &h1, &w.b2, relu);
            ffn[p * d..(p + 1) * d].copy_from_slice(&h2);
        }
        let normed = layer_norm_rows(&ffn, n, d, &w.g_ffn, &w.b_ffn, eps);
        x = normed.iter().zip(&t).map(|(a, b)| a + b).collect();
    }
    let mut out = vec![0.0; n * vocab];
    for p in 0..n {
        for v in 0..vocab {
            out[p * vocab + v] = (0..d).map(|i| e[v * d + i] * x[p * d + i]).sum();
        }
        softmax_in_place(&mut out[p * vocab..(p + 1) * vocab]);
    }
    out
}

/// LeNet on one image `x [chans][side][side]`. Convolution weights are
/// `[out][in][kh][kw]`, `w3` is `[hidden][height][width][chans]`.
#[allow(clippy::too_many_arguments)]
pub fn lenet(
    x: &[f64],
    chans: [usize; 3],
    side: usize,
    kernel: usize,
    pool: usize,
    conv: [(&[f64], &[f64]); 2],
    w3: &[f64],
    b3: &[f64],
    w4: &[f64],
    b4: &[f64],
) -> Vec<f64> {
    let mut h = x.to_vec();
    let mut s = side;
    for (stage, (w, b)) in conv.iter().enumerate() {
        let mut y = conv2d(&h, (chans[stage], s, s), w, (chans[stage + 1], kernel, kernel), b);
        y.iter_mut().for_each(|v| *v = relu(*v));
        s = s + 1 - kernel;
        h = maxpool2d(&y, (chans[stage + 1], s, s), pool);
        s /= pool;
    }
    let c = chans[2];
    // Features in [height][width][chans] order to match w3.
    let mut flat = vec![0.0; s * s * c];
    for ch in 0..c {
        for i in 0..s {
            for j in 0..s {
                flat[(i * s + j) * c + ch] = h[(ch * s + i) * s + j];
            }
        }
    }
    let x3 = affine(w3, &flat, b3, relu);
    let mut out = affine(w4, &x3, b4, |v| v);
    softmax_in_place(&mut out);
    out
}

/// Joint `[a][b]`, marginal `[b]` and posterior `[a][b]` by enumeration.
pub fn bayes(b_given_a: &[f64], a: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let na = a.len();
    let nb = b_given_a.len() / na;
    let mut joint = vec![0.0; na * nb];
    let mut marginal = vec![0.0; nb];
    for i in 0..na {
        for j in 0..nb {
            joint[i * nb + j] = b_given_a[i * nb + j] * a[i];
            marginal[j] += joint[i * nb + j];
        }
    }
    let posterior = (0..na * nb).map(|ij| joint[ij] / marginal[ij % nb]).collect();
    (joint, marginal, posterior)
}

/// Bag-of-words classifier on token ids: `e [vocab][emb]`, `w [classes][emb]`.
pub fn cbow(tokens: &[usize], e: &[f64], w: &[f64], emb: usize) -> Vec<f64> {
    let classes = w.len() / emb;
    let mut total = vec![0.0; emb];
    for &t in tokens {
        for k in 0..emb {
            total[k] += e[t * emb + k];
        }
    }
    let mut out: Vec<f64> = (0..classes)
        .map(|c| (0..emb).map(|k| w[c * emb + k] * total[k]).sum())
        .collect();
    softmax_in_place(&mut out);
    out
}

/// Whether a 9×9 grid of digits 1..=9 is a solved Sudoku.
pub fn sudoku(grid: &[[u8; 9]; 9]) -> bool {
    let mut rows = [[false; 10]; 9];
    let mut cols = [[false; 10]; 9];
    let mut boxes = [[false; 10]; 9];
    for r in 0..9 {
        for c in 0..9 {
            let d = grid[r][c] as usize;
            if !(1..=9).contains(&d) {
                return false;
            }
            let b = (r / 3) * 3 + c / 3;
            if rows[r][d] || cols[c][d] || boxes[b][d] {
                return false;
            }
            rows[r][d] = true;
            cols[c][d] = true;
            boxes[b][d] = true;
        }
    }
    true
}

/// One k-means step on points `[batch][d]` and centers `[clusters][d]`,
/// assuming no ties. Returns `(assignment per point, new centers)`.
pub fn kmeans(x: &[f64], c: &[f64], d: usize) -> (Vec<usize>, Vec<f64>) {
    let (n, k) = (x.len() / d, c.len() / d);
    let dist = |i: usize, j: usize| (0..d).map(|t| (x[i * d + t] - c[j * d + t]).powi(2)).sum::<f64>();
    let assign: Vec<usize> = (0..n)
        .map(|i| {
            (0..k)
                .min_by(|&a, &b| dist(i, a).total_cmp(&dist(i, b)))
                .expect("at least one cluster")
        })
        .collect();
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (i, &j) in assign.iter().enumerate() {
        counts[j] += 1;
        for t in 0..d {
            sums[j * d + t] += x[i * d + t];
        }
    }
    let centers = (0..k * d)
        .map(|jt| {
            if counts[jt / d] == 0 {
                c[jt]
            } else {
                sums[jt] / counts[jt / d] as f64
            }
        })
        .collect();
    (assign, centers)
}

/// Exhaustive beam step: every `(beam, state)` pair scores
/// `h[beam] * gain[beam][state]`; each state keeps its best beam and the top
/// `k` states win. Returns `(score, state)` pairs, best first, ties to the
/// lower state.
pub fn beam(h: &[f64], gain: &[f64], k: usize) -> Vec<(f64, usize)> {
    let states = gain.len() / h.len();
    let mut best: Vec<(f64, usize)> = (0..states)
        .map(|s| {
            let top = (0..h.len())
                .map(|b| h[b] * gain[b * states + s])
                .fold(f64::NEG_INFINITY, f64::max);
            (top, s)
        })
        .collect();
    best.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    best.truncate(k);
    best
}

/// Normal density via a Cholesky factor of `cov [d][d]`.
pub fn mvn(x: &[f64], mean: &[f64], cov: &[f64]) -> f64 {
    let n = x.len();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            l[i * n + j] = if i == j {
                (cov[i * n + i] - s).sqrt()
            } else {
                (cov[i * n + j] - s) / l[j * n + j]
            };
        }
    }
    // Forward substitution: l z = x - mean.
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * z[k]).sum();
        z[i] = (x[i] - mean[i] - s) / l[i * n + i];
    }
    let quad: f64 = z.iter().map(|v| v * v).sum();
    let log_det: f64 = (0..n).map(|i| 2.0 * l[i * n + i].ln()).sum();
    (-0.5 * quad - 0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + log_det)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sudoku_checker() {
        let mut g = [[0u8; 9]; 9];
        for (r, row) in g.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = ((r * 3 + r / 3 + c) % 9 + 1) as u8;
            }
        }
        assert!(sudoku(&g));
        g[0].swap(0, 1);
        assert!(!sudoku(&g));
    }

    #[test]
    fn univariate_density() {
        let p = mvn(&[1.0], &[0.0], &[4.0]);
        let expect = (-0.125f64).exp() / (2.0 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((p - expect).abs() < 1e-15);
    }
}
