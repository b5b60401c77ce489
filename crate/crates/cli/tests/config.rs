use std::path::PathBuf;

use spfc_cli::config::{parse_config, parse_config_with, Mode, Origin, Profile};
use spfc_core::harness::{SiteShape, SNAPSHOT_TIMES};
use spfc_core::psd::ResidualNorm;
use spfc_core::stepper::Segment;
use spfc_core::Scheme;

#[test]
fn minimal_config_takes_documented_defaults() {
    let c = parse_config("output.dir = out").unwrap();
    assert_eq!(c.mode, Mode::Simulate);
    assert_eq!(c.profile, Profile::Full);
    assert_eq!(c.params.epsilon(), 0.5);
    assert_eq!(c.params.reg_a(), 0.5 * 0.5 / 16.0);
    assert!(c.params.stable_guarantee());
    assert_eq!(c.params.scheme(), Scheme::Bdf2Es1);
    assert_eq!((c.n, c.length), (256, 100.0));
    assert_eq!(
        c.schedule,
        vec![Segment {
            dt: 0.05,
            t_end: 100.0
        }]
    );
    assert_eq!(c.psd.tol, 1e-9);
    assert_eq!(c.sites.len(), 1);
    assert_eq!(c.site_shape, SiteShape::Impulse);
    assert_eq!(c.snapshot_times, SNAPSHOT_TIMES.to_vec());
    assert_eq!(c.study.n_list, (6..=20).collect::<Vec<_>>());
    assert_eq!(c.study.nk_list, vec![100, 200, 400, 800]);

    // A follows epsilon unless set
    let c = parse_config("output.dir = out\nmodel.epsilon = 0.2").unwrap();
    assert_eq!(c.params.reg_a(), 0.2 * 0.2 / 16.0);
}

#[test]
fn study_modes_default_to_the_manufactured_parameters() {
    let c = parse_config("mode = conv-time\noutput.dir = o").unwrap();
    assert_eq!((c.params.epsilon(), c.params.reg_a()), (0.025, 0.25));
    assert!((c.params.a() - 0.975).abs() < 1e-15);
    assert_eq!(c.psd.tol, 1e-12);
    assert_eq!(c.study.n, 128);
    let c = parse_config_with("mode = conv-time\noutput.dir = o", &["profile=ci".into()]).unwrap();
    assert_eq!(c.study.n, 64);
}

#[test]
fn small_epsilon_with_large_regularization_is_stable() {
    let c = parse_config("output.dir = o\nmodel.A = 0.25\nmodel.epsilon = 0.025").unwrap();
    assert!(c.params.stable_guarantee());
    let c = parse_config("output.dir = o\nmodel.A = 0\nmodel.epsilon = 0.9").unwrap();
    assert!(!c.params.stable_guarantee());
}

#[test]
fn errors_name_key_and_line() {
    let e = parse_config("output.dir = o\n\ngrid.n = 2").unwrap_err();
    assert_eq!((e.origin, e.key.as_str()), (Origin::Line(3), "grid.n"));
    assert_eq!(
        e.to_string(),
        "line 3: grid.n: need at least 3 points per axis, got 2"
    );

    let e = parse_config("output.dir = o\nmodel.epsilon = 1.5").unwrap_err();
    assert_eq!(
        (e.origin, e.key.as_str()),
        (Origin::Line(2), "model.epsilon")
    );

    let e = parse_config("output.dir = o\nmodel.epsilon = half").unwrap_err();
    assert!(e.to_string().contains("expected a number"));

    let e = parse_config("output.dir = o\nmodel.epsilonn = 0.5").unwrap_err();
    assert_eq!(
        (e.origin, e.message.as_str()),
        (Origin::Line(2), "unknown key")
    );

    let e = parse_config("grid.n = 64").unwrap_err();
    assert_eq!((e.origin, e.key.as_str()), (Origin::Default, "output.dir"));

    let e = parse_config("output.dir = o\nthis line has no equals").unwrap_err();
    assert_eq!(e.origin, Origin::Line(2));

    let e = parse_config_with("output.dir = o", &["psd.tol=-1".into()]).unwrap_err();
    assert_eq!((e.origin, e.key.as_str()), (Origin::Override, "psd.tol"));

    for bad in [
        "time.schedule = 0.3:1",
        "time.schedule = 0.1:2, 0.1:1",
        "init.sites = 150,50,10",
        "init.sites = 1,2",
        "model.scheme = 3",
        "psd.residual_norm = h2",
        "profile = fast",
        "study.nk_list = 100",
    ] {
        let e = parse_config(&format!("output.dir = o\n{bad}")).unwrap_err();
        assert_eq!(e.origin, Origin::Line(2), "{bad}");
    }
}

#[test]
fn full_config_and_render_round_trip() {
    let text = "
        mode = simulate
        seed = 42
        model.epsilon = 0.3
        model.A = 0.01
        model.scheme = bdf2-es-2
        model.dealias = true
        grid.n = 48
        grid.length = 30
        time.schedule = 0.05:1, 0.1:3
        psd.tol = 1e-10
        psd.max_iter = 50
        psd.residual_norm = hm1
        psd.unit_step = false
        init.amplitude = 0.1
        init.sites = 10,10,1; 20,20,2
        init.site_shape = gaussian
        output.dir = /tmp/x y
        output.snapshot_times = 0.5, 2
        output.record_every = 5
        study.n_list = 6..=8, 12
        study.schemes = 2
    ";
    let c = parse_config(text).unwrap();
    assert_eq!(c.seed, 42);
    assert_eq!(c.params.scheme(), Scheme::Bdf2Es2);
    assert!(c.params.dealias());
    assert_eq!(c.psd.residual_norm, ResidualNorm::Hm1);
    assert_eq!(c.output_dir, PathBuf::from("/tmp/x y"));
    assert_eq!(c.study.n_list, vec![6, 7, 8, 12]);
    assert_eq!(c.study.schemes, vec![Scheme::Bdf2Es2]);
    assert_eq!(parse_config(&c.render()).unwrap(), c);

    let d = parse_config(
        "output.dir = o\noutput.snapshot_times = none\ninit.sites = none\ntime.schedule = long",
    )
    .unwrap();
    assert!(d.snapshot_times.is_empty() && d.sites.is_empty());
    assert_eq!(d.schedule.last().unwrap().t_end, 9000.0);
    assert_eq!(parse_config(&d.render()).unwrap(), d);
}
