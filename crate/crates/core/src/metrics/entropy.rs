use alloc::vec::Vec;

/// Default cut-off on the proportion of entropy removed by another attribute.
pub const DEFAULT_REDUCTION_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct Qualification {
    /// Attributes that count towards the score, ascending.
    pub qualified: Vec<usize>,
    pub disqualified: Vec<usize>,
    /// Largest `I(a; b) / H(a)` over `b != a`; 1.0 for constant attributes.
    pub reduction: Vec<f64>,
}

fn h(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * libm::log2(p) - (1.0 - p) * libm::log2(1.0 - p)
    }
}

/// Marginal entropy in bits of column `a`.
pub fn entropy(attrs: &[Vec<bool>], a: usize) -> f64 {
    let n = attrs.len() as f64;
    h(attrs.iter().filter(|r| r[a]).count() as f64 / n)
}

/// `H(a | b)` in bits from the empirical 2x2 joint table.
pub fn conditional_entropy(attrs: &[Vec<bool>], a: usize, b: usize) -> f64 {
    let n = attrs.len() as f64;
    let mut counts = [[0usize; 2]; 2];
    for r in attrs {
        counts[usize::from(r[b])][usize::from(r[a])] += 1;
    }
    counts
        .iter()
        .map(|[a0, a1]| {
            let nb = (a0 + a1) as f64;
            if nb == 0.0 {
                0.0
            } else {
                nb / n * h(*a1 as f64 / nb)
            }
        })
        .sum()
}

/// Splits attributes (columns of the `L x A` table) into those that are
/// informationally independent enough to score and those that are not.
///
/// Attribute `a` is disqualified when some other attribute `b` removes more
/// than `threshold` of its entropy, `(H(a) - H(a|b)) / H(a) > threshold`, or
/// when `H(a) = 0`.
pub fn entropy_disqualify(attrs: &[Vec<bool>], threshold: f64) -> Qualification {
    let count = attrs.first().map_or(0, Vec::len);
    let mut out = Qualification {
        qualified: Vec::new(),
        disqualified: Vec::new(),
        reduction: Vec::with_capacity(count),
    };
    for a in 0..count {
        let ha = entropy(attrs, a);
        let reduction = if ha == 0.0 {
            1.0
        } else {
            (0..count)
                .filter(|&b| b != a)
                .map(|b| (ha - conditional_entropy(attrs, a, b)) / ha)
                .fold(0.0, f64::max)
        };
        out.reduction.push(reduction);
        if ha == 0.0 || reduction > threshold {
            out.disqualified.push(a);
        } else {
            out.qualified.push(a);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn table(cols: &[&[bool]]) -> Vec<Vec<bool>> {
        (0..cols[0].len()).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
    }

    #[test]
    fn independent_coins_both_qualify() {
        // Every combination equally often: zero mutual information.
        let a = [false, false, true, true];
        let b = [false, true, false, true];
        let q = entropy_disqualify(&table(&[&a, &b]), 0.2);
        assert_eq!(q.qualified, vec![0, 1]);
        assert!(q.reduction.iter().all(|&r| r.abs() < 1e-12));
    }

    #[test]
    fn duplicated_column_disqualifies_both() {
        let a = [false, true, true, false, true];
        let c = [true, false, true, true, false];
        let q = entropy_disqualify(&table(&[&a, &a, &c]), 0.2);
        assert!(q.disqualified.contains(&0) && q.disqualified.contains(&1));
        assert!((q.reduction[0] - 1.0).abs() < 1e-12);
        assert!((q.reduction[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_joint_table() {
        // P(a,b): (0,0)=3/8, (0,1)=1/8, (1,0)=1/8, (1,1)=3/8.
        let a = [false, false, false, false, true, true, true, true];
        let b = [false, false, false, true, false, true, true, true];
        let t = table(&[&a, &b]);
        assert!((entropy(&t, 0) - 1.0).abs() < 1e-12);
        // Given b, a agrees with probability 3/4 on each branch.
        let hq = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((conditional_entropy(&t, 0, 1) - hq).abs() < 1e-12);
        let q = entropy_disqualify(&t, 0.2);
        assert!((q.reduction[0] - (1.0 - hq)).abs() < 1e-12);
        // 1 - 0.811 = 0.189 <= 0.2: still qualified.
        assert_eq!(q.qualified, vec![0, 1]);
    }

    #[test]
    fn constant_attribute_is_degenerate() {
        let a = [true, true, true, true];
        let b = [false, true, false, true];
        let q = entropy_disqualify(&table(&[&a, &b]), 0.2);
        assert_eq!(q.disqualified, vec![0]);
        assert_eq!(q.qualified, vec![1]);
    }

    #[test]
    fn single_attribute_is_qualified() {
        let q = entropy_disqualify(&table(&[&[true, false, false]]), 0.2);
        assert_eq!(q.qualified, vec![0]);
    }
}
