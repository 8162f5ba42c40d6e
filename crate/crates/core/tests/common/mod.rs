//! Independent reference implementations shared by the integration tests
//! and the acceptance runner. Nothing here calls into the library's numerical
//! code paths; only plain data (signs, genotypes) is read from it.

#![allow(dead_code)]

use mscr::{Activation, Couplings, MscrGenotype};
use num_bigint::{BigInt, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Reachability by depth-first search from every vertex (reflexive).
pub fn dfs_reach(k: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<Vec<bool>> {
    let mut out = vec![vec![false; k]; k];
    for s in 0..k {
        let mut stack = vec![s];
        out[s][s] = true;
        while let Some(v) = stack.pop() {
            for w in 0..k {
                if edge(v, w) && !out[s][w] {
                    out[s][w] = true;
                    stack.push(w);
                }
            }
        }
    }
    out
}

/// Dense simulation of a multi-reservoir.
///
/// The whole system is one `kn`-dimensional state. Each step solves
/// `x = f(P·x_prev + B·x + c·u + b)` by fixed-point iteration from zero,
/// where `P` is block-diagonal `ρ·C`, `B` holds the inter-encoder blocks
/// `H_ji·V_j^(i)` and `c` the scaled input columns. For an acyclic `A`, `B`
/// is nilpotent and `k` sweeps give the exact same-step solution without any
/// reference to an evaluation order.
pub struct DenseOracle {
    pub kn: usize,
    pub p: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub bias: Vec<f64>,
    pub k: usize,
    pub activation: Activation,
}

impl DenseOracle {
    /// `g.a` must already be acyclic.
    pub fn new(g: &MscrGenotype, couplings: &Couplings, n: usize, rho: f64, bias_scale: f64, activation: Activation) -> Self {
        let k = g.k;
        let kn = k * n;
        let mut p = vec![vec![0.0; kn]; kn];
        let mut b = vec![vec![0.0; kn]; kn];
        let mut c = vec![0.0; kn];
        let mut bias = vec![0.0; kn];
        for i in 0..k {
            // Full-cycle permutation: unit r feeds unit (r + 1) mod n.
            for r in 0..n {
                p[i * n + (r + 1) % n][i * n + r] = rho;
            }
            if g.d[i] {
                for r in 0..n {
                    c[i * n + r] = g.s[i] * couplings.input(i)[r];
                }
            }
            for r in 0..n {
                bias[i * n + r] = bias_scale * couplings.bias(i)[r];
            }
            for j in 0..k {
                if j != i && g.a.get(j, i) {
                    let v = couplings.cross(j, i).expect("coupling for kept edge");
                    for r in 0..n {
                        for col in 0..n {
                            b[i * n + r][j * n + col] = g.h(j, i) * v[r * n + col];
                        }
                    }
                }
            }
        }
        DenseOracle { kn, p, b, c, bias, k, activation }
    }

    fn f(&self, v: f64) -> f64 {
        match self.activation {
            Activation::Identity => v,
            Activation::Tanh => v.tanh(),
        }
    }

    pub fn step(&self, prev: &[f64], u: f64) -> Vec<f64> {
        let base: Vec<f64> = (0..self.kn)
            .map(|r| (0..self.kn).map(|col| self.p[r][col] * prev[col]).sum::<f64>() + self.c[r] * u + self.bias[r])
            .collect();
        let mut x = vec![0.0; self.kn];
        for _ in 0..=self.k {
            x = (0..self.kn)
                .map(|r| self.f(base[r] + (0..self.kn).map(|col| self.b[r][col] * x[col]).sum::<f64>()))
                .collect();
        }
        x
    }

    pub fn run(&self, inputs: &[f64]) -> Vec<Vec<f64>> {
        let mut x = vec![0.0; self.kn];
        inputs
            .iter()
            .map(|&u| {
                x = self.step(&x, u);
                x.clone()
            })
            .collect()
    }
}

/// Ridge solution by Gaussian elimination with partial pivoting on the
/// explicitly formed normal equations.
pub fn ridge_oracle(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
    let p = x[0].len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for i in 0..p {
        for j in 0..p {
            a[i][j] = x.iter().map(|row| row[i] * row[j]).sum();
        }
        a[i][i] += lambda;
        a[i][p] = x.iter().zip(y).map(|(row, yy)| row[i] * yy).sum();
    }
    for col in 0..p {
        let piv = (col..p).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs())).unwrap();
        a.swap(col, piv);
        for r in col + 1..p {
            let m = a[r][col] / a[col][col];
            for c in col..=p {
                a[r][c] -= m * a[col][c];
            }
        }
    }
    let mut w = vec![0.0; p];
    for r in (0..p).rev() {
        let s: f64 = (r + 1..p).map(|c| a[r][c] * w[c]).sum();
        w[r] = (a[r][p] - s) / a[r][r];
    }
    w
}

/// Relative residual `‖(XᵀX + λI)w − Xᵀy‖ / ‖Xᵀy‖`, computed naively.
pub fn normal_residual(x: &[Vec<f64>], y: &[f64], lambda: f64, w: &[f64]) -> f64 {
    let p = w.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..p {
        let xty: f64 = x.iter().zip(y).map(|(row, yy)| row[i] * yy).sum();
        let mut lhs = lambda * w[i];
        for j in 0..p {
            lhs += x.iter().map(|row| row[i] * row[j]).sum::<f64>() * w[j];
        }
        num += (lhs - xty).powi(2);
        den += xty * xty;
    }
    (num / den).sqrt()
}

/// First `count` fractional bits of π from Machin's formula
/// `π = 16·atan(1/5) − 4·atan(1/239)` in binary fixed point.
pub fn machin_pi_bits(count: usize) -> Vec<bool> {
    let prec = count as u64 + 64;
    let one = BigUint::from(1u32) << prec;
    let atan_inv = |x: u32| -> BigInt {
        let x2 = BigUint::from(x * x);
        let mut power = &one / BigUint::from(x);
        let mut sum = BigInt::from(0);
        let mut k = 0u32;
        while power != BigUint::from(0u32) {
            let term = BigInt::from(&power / BigUint::from(2 * k + 1));
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
            power /= &x2;
            k += 1;
        }
        sum
    };
    let pi: BigInt = atan_inv(5) * 16 - atan_inv(239) * 4;
    let pi = pi.to_biguint().expect("positive");
    let frac = pi - (BigUint::from(3u32) << prec);
    (1..=count as u64).map(|i| frac.bit(prec - i)).collect()
}

/// Random genotype with arbitrary (possibly cyclic) adjacency.
pub fn random_genotype(k: usize, r: &mut impl Rng) -> MscrGenotype {
    let mut g = MscrGenotype::new(k);
    for i in 0..k {
        g.s[i] = r.random_range(-1.0..1.0);
        g.d[i] = r.random::<bool>();
        for j in 0..k {
            if i != j {
                g.set_h(i, j, r.random_range(-0.5..0.5));
                g.a.set(i, j, r.random_range(0.0..1.0) < 0.4);
            }
        }
    }
    g
}

/// A parsed DOT digraph: node ids and labeled edges.
#[derive(Debug, Default)]
pub struct Dot {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String, String)>,
}

/// Minimal parser for the DOT subset `digraph ID { stmt; ... }` with node
/// statements `ID [attrs]`, edge statements `ID -> ID [attrs]` and graph
/// attributes `key=value`. Returns an error on anything else.
pub fn parse_dot(text: &str) -> Result<Dot, String> {
    let text = text.trim();
    let rest = text.strip_prefix("digraph").ok_or("missing digraph keyword")?.trim_start();
    let open = rest.find('{').ok_or("missing {")?;
    let id = rest[..open].trim();
    if !is_id(id) {
        return Err(format!("bad graph id {id:?}"));
    }
    let body = rest[open + 1..].strip_suffix('}').ok_or("missing closing }")?;
    let mut dot = Dot::default();
    for stmt in split_statements(body)? {
        let stmt = stmt.trim();
        if stmt.is_empty() {
            continue;
        }
        let (head, attrs) = match stmt.find('[') {
            Some(i) => {
                let a = stmt[i..].strip_prefix('[').and_then(|s| s.strip_suffix(']')).ok_or("unterminated attribute list")?;
                (stmt[..i].trim(), parse_attrs(a)?)
            }
            None => (stmt, Vec::new()),
        };
        if let Some((a, b)) = head.split_once("->") {
            let (a, b) = (a.trim(), b.trim());
            if !is_id(a) || !is_id(b) {
                return Err(format!("bad edge {head:?}"));
            }
            let label = attrs.iter().find(|(k, _)| k == "label").map(|(_, v)| v.clone()).unwrap_or_default();
            dot.edges.push((a.to_string(), b.to_string(), label));
        } else if let Some((k, v)) = head.split_once('=') {
            if !is_id(k.trim()) || !is_id(v.trim()) {
                return Err(format!("bad graph attribute {head:?}"));
            }
        } else if is_id(head) {
            dot.nodes.push(head.to_string());
        } else {
            return Err(format!("unrecognized statement {stmt:?}"));
        }
    }
    Ok(dot)
}

fn is_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && !s.starts_with(|c: char| c.is_ascii_digit())
}

fn split_statements(body: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_str = false;
    for c in body.chars() {
        match c {
            '"' => {
                in_str = !in_str;
                cur.push(c);
            }
            ';' | '\n' if !in_str => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    if in_str {
        return Err("unterminated string".into());
    }
    out.push(cur);
    Ok(out)
}

fn parse_attrs(s: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(|| format!("bad attribute {part:?}"))?;
        let v = v.trim();
        let v = match v.strip_prefix('"') {
            Some(inner) => inner.strip_suffix('"').ok_or("unterminated quoted value")?.to_string(),
            None if is_id(v) || v.parse::<f64>().is_ok() => v.to_string(),
            None => return Err(format!("bad attribute value {v:?}")),
        };
        out.push((k.trim().to_string(), v));
    }
    Ok(out)
}
