use consistox_web::{concentration, parse_values, readability_of, Explorer};

#[test]
fn explorer_default_box_finds_planted() {
    let ex = Explorer::build(4, 60, 3, "insult").unwrap();
    assert_eq!(ex.points().len(), 64);
    let s = ex.select(0.4, 0.25);
    assert_eq!(s.true_positives, 4);
    assert_eq!(s.false_positives, 0);
    assert_eq!(s.missed, 0);
    // an empty box selects nothing
    let s = ex.select(1.1, 0.25);
    assert!(s.focus.is_empty());
    assert_eq!(s.missed, 4);
}

#[test]
fn explorer_rejects_unknown_dimension() {
    assert!(Explorer::build(1, 10, 0, "rudeness").is_err());
}

#[test]
fn lorenz_curve_ends_at_one_and_matches_gini() {
    let v = parse_values("1, 2; 3 4\n10").unwrap();
    assert_eq!(v, vec![1.0, 2.0, 3.0, 4.0, 10.0]);
    let c = concentration(&v).unwrap();
    assert_eq!(c.lorenz.len(), 6);
    assert_eq!(c.lorenz.last().unwrap(), &(1.0, 1.0));
    assert_eq!(c.median, 3.0);
    // trapezoid area under the Lorenz curve
    let area: f64 = c
        .lorenz
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    assert!(
        (c.gini - (1.0 - 2.0 * area)).abs() < 1e-12,
        "{} vs {}",
        c.gini,
        1.0 - 2.0 * area
    );
    assert!(parse_values("1 x").is_err());
    assert!(concentration(&[]).is_err());
}

#[test]
fn readability_of_lines() {
    let m = readability_of("the cat sat\n\n").unwrap();
    assert!((m.ari - (-5.80)).abs() < 0.005);
    assert!(readability_of("   ").is_err());
}
