use super::{check_points, pareto_front, AnalyticsError, DesignPoint};

/// Average Distance from Reference Set.
///
/// For each reference point γ, the distance to the closest approximate point
/// ω is `max_j max(0, (ω_j - γ_j) / γ_j)`; the result is the mean over the
/// reference. Reference points with a zero component are rejected.
pub fn adrs(reference: &[DesignPoint], approx: &[DesignPoint]) -> Result<f64, AnalyticsError> {
    let dim = check_points(reference)?;
    let approx_dim = check_points(approx)?;
    if approx_dim != dim {
        return Err(AnalyticsError::DimensionMismatch { expected: dim, found: approx_dim });
    }
    for g in reference {
        if let Some(j) = g.objectives.iter().position(|&v| v == 0.0) {
            return Err(AnalyticsError::ZeroReferenceComponent { configuration_id: g.configuration_id, objective: j });
        }
        if g.objectives.iter().any(|&v| v < 0.0) {
            return Err(AnalyticsError::Negative);
        }
    }

    let total: f64 = reference
        .iter()
        .map(|g| {
            approx
                .iter()
                .map(|w| {
                    g.objectives.iter().zip(&w.objectives).map(|(gj, wj)| ((wj - gj) / gj).max(0.0)).fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / reference.len() as f64)
}

/// Area dominated by `points` and bounded by `ref_point`, for two objectives.
///
/// Every point must be componentwise `<=` the reference. An empty set has
/// zero hypervolume.
pub fn hypervolume_2d(points: &[DesignPoint], ref_point: &[f64]) -> Result<f64, AnalyticsError> {
    if ref_point.len() != 2 {
        return Err(AnalyticsError::NotTwoDimensional(ref_point.len()));
    }
    if ref_point.iter().any(|v| !v.is_finite()) {
        return Err(AnalyticsError::NonFinite);
    }
    if points.is_empty() {
        return Ok(0.0);
    }
    let dim = check_points(points)?;
    if dim != 2 {
        return Err(AnalyticsError::NotTwoDimensional(dim));
    }
    if let Some(p) = points.iter().find(|p| p.objectives[0] > ref_point[0] || p.objectives[1] > ref_point[1]) {
        return Err(AnalyticsError::ExceedsReference { configuration_id: p.configuration_id });
    }

    // Front is ascending in x and strictly descending in y: sum the slabs
    // between consecutive x coordinates.
    let front = pareto_front(points)?;
    let mut area = 0.0;
    for (i, p) in front.points.iter().enumerate() {
        let next_x = front.points.get(i + 1).map_or(ref_point[0], |q| q.objectives[0]);
        area += (next_x - p.objectives[0]) * (ref_point[1] - p.objectives[1]);
    }
    Ok(area)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, id: i64) -> DesignPoint {
        DesignPoint::new(vec![x, y], id)
    }

    #[test]
    fn adrs_self_is_zero() {
        let f = vec![p(1.0, 3.0, 0), p(2.0, 2.0, 1), p(3.0, 1.0, 2)];
        assert_eq!(adrs(&f, &f).unwrap(), 0.0);
    }

    #[test]
    fn adrs_hand_value() {
        assert_eq!(adrs(&[p(1.0, 1.0, 0)], &[p(2.0, 1.0, 1)]).unwrap(), 1.0);
        // mean of 0.5 and 0 (second reference point matched exactly)
        let gamma = [p(2.0, 4.0, 0), p(4.0, 2.0, 1)];
        let omega = [p(3.0, 4.0, 2), p(4.0, 2.0, 3)];
        assert_eq!(adrs(&gamma, &omega).unwrap(), 0.25);
    }

    #[test]
    fn adrs_better_approx_is_zero() {
        assert_eq!(adrs(&[p(2.0, 2.0, 0)], &[p(1.0, 1.0, 1)]).unwrap(), 0.0);
    }

    #[test]
    fn adrs_errors() {
        assert!(matches!(
            adrs(&[p(0.0, 1.0, 5)], &[p(1.0, 1.0, 1)]),
            Err(AnalyticsError::ZeroReferenceComponent { configuration_id: 5, objective: 0 })
        ));
        assert!(matches!(adrs(&[], &[p(1.0, 1.0, 1)]), Err(AnalyticsError::Empty)));
        assert!(matches!(adrs(&[p(1.0, 1.0, 1)], &[]), Err(AnalyticsError::Empty)));
        let three = DesignPoint::new(vec![1.0, 1.0, 1.0], 2);
        assert!(matches!(adrs(&[p(1.0, 1.0, 1)], &[three]), Err(AnalyticsError::DimensionMismatch { .. })));
    }

    #[test]
    fn hypervolume_cases() {
        assert_eq!(hypervolume_2d(&[p(0.0, 0.0, 0)], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(hypervolume_2d(&[p(0.0, 0.5, 0), p(0.5, 0.0, 1)], &[1.0, 1.0]).unwrap(), 0.75);
        assert_eq!(hypervolume_2d(&[p(0.0, 0.5, 0), p(0.5, 0.0, 1), p(0.75, 0.75, 2)], &[1.0, 1.0]).unwrap(), 0.75);
        assert_eq!(hypervolume_2d(&[], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(
            hypervolume_2d(&[p(2.0, 0.0, 4)], &[1.0, 1.0]),
            Err(AnalyticsError::ExceedsReference { configuration_id: 4 })
        ));
        assert!(matches!(hypervolume_2d(&[p(0.0, 0.0, 0)], &[1.0]), Err(AnalyticsError::NotTwoDimensional(1))));
    }
}
