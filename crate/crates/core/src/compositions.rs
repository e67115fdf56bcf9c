//! Weak compositions of an integer, enumerated in colexicographic order.

/// Iterator over all `(c_1, …, c_parts)` with `c_i >= 0` and `Σ c_i = total`.
///
/// The first coordinate varies fastest: `(m,0,…)`, `(m-1,1,0,…)`, …,
/// `(0,…,0,m)`.
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Option<Vec<usize>>,
}

impl Compositions {
    pub fn new(total: usize, parts: usize) -> Self {
        let current = if parts == 0 {
            (total == 0).then(Vec::new)
        } else {
            let mut first = vec![0; parts];
            first[0] = total;
            Some(first)
        };
        Self { current }
    }
}

impl Iterator for Compositions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let n = out.len();
        if let Some(j) = out.iter().position(|&c| c > 0).filter(|&j| j + 1 < n) {
            let mut next = out.clone();
            let v = next[j] - 1;
            next[j] = 0;
            next[j + 1] += 1;
            next[0] = v;
            self.current = Some(next);
        }
        Some(out)
    }
}

/// Number of weak compositions of `total` into `parts` parts.
pub fn count(total: usize, parts: usize) -> usize {
    if parts == 0 {
        return usize::from(total == 0);
    }
    binomial(total + parts - 1, parts - 1).round() as usize
}

/// Binomial coefficient as a float (exact for the small arguments used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Ordinary multinomial `m! / Π parts_i!` with `m = Σ parts`.
pub fn multinomial(parts: &[usize]) -> f64 {
    let mut acc = 1.0;
    let mut running = 0;
    for &p in parts {
        running += p;
        acc *= binomial(running, p);
    }
    acc
}
