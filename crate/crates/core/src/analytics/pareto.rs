use std::cmp::Ordering;

use super::{check_points, AnalyticsError, DesignPoint};

/// Strict Pareto dominance for minimization.
pub fn dominates(a: &DesignPoint, b: &DesignPoint) -> Result<bool, AnalyticsError> {
    if a.dim() != b.dim() {
        return Err(AnalyticsError::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(dominates_unchecked(&a.objectives, &b.objectives))
}

pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Non-dominated subset, ascending by the first objective (then the rest).
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    pub points: Vec<DesignPoint>,
    /// For each front point, every configuration id sharing its exact
    /// objective vector (ascending; the first is the representative).
    pub tied_ids: Vec<Vec<i64>>,
}

impl ParetoFront {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains_id(&self, configuration_id: i64) -> bool {
        self.tied_ids.iter().flatten().any(|&id| id == configuration_id)
    }
}

fn lex(a: &DesignPoint, b: &DesignPoint) -> Ordering {
    for (x, y) in a.objectives.iter().zip(&b.objectives) {
        match x.partial_cmp(y).expect("finite objectives") {
            Ordering::Equal => {}
            other => return other,
        }
    }
    a.configuration_id.cmp(&b.configuration_id)
}

/// Extract the non-dominated points.
///
/// Duplicate objective vectors collapse onto the lowest configuration id.
/// Runs in O(n log n) for two objectives and O(n·|front|) otherwise.
pub fn pareto_front(points: &[DesignPoint]) -> Result<ParetoFront, AnalyticsError> {
    let dim = check_points(points)?;
    let mut order: Vec<&DesignPoint> = points.iter().collect();
    order.sort_by(|a, b| lex(a, b));

    // Collapse identical vectors; `order` is sorted so ties are adjacent.
    let mut unique: Vec<(&DesignPoint, Vec<i64>)> = Vec::with_capacity(order.len());
    for p in order {
        match unique.last_mut() {
            Some((rep, ids)) if rep.objectives == p.objectives => ids.push(p.configuration_id),
            _ => unique.push((p, vec![p.configuration_id])),
        }
    }

    let mut front = ParetoFront { points: Vec::new(), tied_ids: Vec::new() };
    if dim == 2 {
        let mut best = f64::INFINITY;
        for (p, ids) in unique {
            if p.objectives[1] < best {
                best = p.objectives[1];
                front.points.push(p.clone());
                front.tied_ids.push(ids);
            }
        }
    } else {
        // Any dominator precedes its victim in lexicographic order, and the
        // first point of a dominance chain is itself on the front.
        for (p, ids) in unique {
            if !front.points.iter().any(|f| dominates_unchecked(&f.objectives, &p.objectives)) {
                front.points.push(p.clone());
                front.tied_ids.push(ids);
            }
        }
    }
    Ok(front)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<DesignPoint> {
        v.iter().enumerate().map(|(i, &(x, y))| DesignPoint::new(vec![x, y], i as i64)).collect()
    }

    #[test]
    fn dominance_cases() {
        let p = pts(&[(1.0, 1.0), (2.0, 2.0), (1.0, 2.0), (2.0, 1.0)]);
        assert!(dominates(&p[0], &p[1]).unwrap());
        assert!(!dominates(&p[2], &p[3]).unwrap());
        assert!(!dominates(&p[3], &p[2]).unwrap());
        assert!(!dominates(&p[0], &p[0]).unwrap());
        let bad = DesignPoint::new(vec![1.0], 9);
        assert!(matches!(dominates(&p[0], &bad), Err(AnalyticsError::DimensionMismatch { .. })));
    }

    #[test]
    fn four_point_front() {
        let f = pareto_front(&pts(&[(1.0, 3.0), (2.0, 2.0), (3.0, 1.0), (3.0, 3.0)])).unwrap();
        let got: Vec<_> = f.points.iter().map(|p| (p.objectives[0], p.objectives[1])).collect();
        assert_eq!(got, [(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]);
    }

    #[test]
    fn single_and_empty() {
        let f = pareto_front(&pts(&[(5.0, 5.0)])).unwrap();
        assert_eq!(f.len(), 1);
        assert!(matches!(pareto_front(&[]), Err(AnalyticsError::Empty)));
        let nan = [DesignPoint::new(vec![f64::NAN, 1.0], 0)];
        assert!(matches!(pareto_front(&nan), Err(AnalyticsError::NonFinite)));
    }

    #[test]
    fn ties_keep_lowest_id() {
        let points = vec![
            DesignPoint::new(vec![1.0, 1.0], 7),
            DesignPoint::new(vec![1.0, 1.0], 3),
            DesignPoint::new(vec![2.0, 2.0], 1),
        ];
        let f = pareto_front(&points).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.points[0].configuration_id, 3);
        assert_eq!(f.tied_ids[0], [3, 7]);
        assert!(f.contains_id(7));
    }

    #[test]
    fn three_objectives() {
        let points = vec![
            DesignPoint::new(vec![1.0, 2.0, 3.0], 0),
            DesignPoint::new(vec![1.0, 2.0, 4.0], 1),
            DesignPoint::new(vec![3.0, 1.0, 3.0], 2),
            DesignPoint::new(vec![0.5, 5.0, 5.0], 3),
        ];
        let f = pareto_front(&points).unwrap();
        let mut ids: Vec<_> = f.points.iter().map(|p| p.configuration_id).collect();
        ids.sort();
        assert_eq!(ids, [0, 2, 3]);
    }

    #[test]
    fn two_d_front_is_strictly_decreasing() {
        let f = pareto_front(&pts(&[(1.0, 5.0), (1.0, 4.0), (2.0, 4.0), (2.0, 3.0), (4.0, 1.0)])).unwrap();
        for w in f.points.windows(2) {
            assert!(w[0].objectives[0] < w[1].objectives[0]);
            assert!(w[0].objectives[1] > w[1].objectives[1]);
        }
        assert_eq!(f.len(), 3);
    }
}
