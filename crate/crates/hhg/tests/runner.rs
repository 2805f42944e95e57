use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use hhg::config::RunConfig;
use hhg::files::{self, Checkpoint};
use hhg::runner::{analyze, read_manifest, run, RunError, RunOptions, RunStatus};
use hhg::sweep::{compare, sweep, SweepAxis};

fn small(root: &Path, extra: &[&str]) -> RunConfig {
    let mut o: Vec<String> = [
        "basis.r_max=30.0",
        "basis.n_splines=50",
        "basis.order=7",
        "basis.l_max=3",
        "basis.inner_radius=5.0",
        "propagator.dt=0.1",
        "propagator.absorber_start=22.0",
        "propagator.energy_cutoff=20.0",
        "propagator.checkpoint_every=0",
        "pulse.n_cycles=2.0",
        "tail_cycles=0.5",
        "observables.max_order=15",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    o.push(format!("output.root={:?}", root.display().to_string()));
    o.extend(extra.iter().map(|s| s.to_string()));
    RunConfig::parse_with_overrides("", &o).unwrap()
}

fn listing(dir: &Path) -> BTreeSet<String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_file())
        .map(|e| e.file_name().into_string().unwrap())
        .collect()
}

#[test]
fn run_writes_a_complete_directory_and_reruns_are_skipped() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small(tmp.path(), &[]);
    let first = run(&cfg, &RunOptions::default()).unwrap();
    assert!(!first.skipped);
    let m = &first.manifest;
    assert_eq!(m.status, RunStatus::Complete);
    assert_eq!(m.config_hash, cfg.hash());
    assert_eq!(m.steps_completed, m.steps_total);
    let gs = m.ground_state.as_ref().unwrap();
    assert!(gs.energy < -0.8 && gs.energy > -1.0, "{}", gs.energy);
    let ion = m.ionization.unwrap();
    assert!(ion.ionization >= 0.0 && ion.ionization < 0.01);
    assert!((ion.final_norm + ion.absorbed - 1.0).abs() < 1e-8);
    assert!(m.observables.as_ref().unwrap().ehrenfest_fd_rel_rms.is_some());

    // every data file is listed by a manifest whose hash matches the config snapshot
    let mut expected: BTreeSet<String> = m.files.iter().cloned().collect();
    expected.insert(files::CONFIG_FILE.into());
    expected.insert(files::MANIFEST_FILE.into());
    assert_eq!(listing(&first.dir), expected);
    let snapshot = RunConfig::parse(&fs::read_to_string(first.dir.join(files::CONFIG_FILE)).unwrap()).unwrap();
    assert_eq!(snapshot.hash(), m.config_hash);

    let record = files::read_dipole(&first.dir.join(files::DIPOLE_FILE)).unwrap();
    assert_eq!(record.len() as u64, m.steps_total + 1);
    let spectrum = files::read_spectrum(&first.dir.join(files::SPECTRUM_FILE)).unwrap();
    assert!(spectrum.max_order() >= 15.0);

    let bytes = fs::read(first.dir.join(files::MANIFEST_FILE)).unwrap();
    let second = run(&cfg, &RunOptions::default()).unwrap();
    assert!(second.skipped);
    assert_eq!(second.manifest, first.manifest);
    assert_eq!(fs::read(first.dir.join(files::MANIFEST_FILE)).unwrap(), bytes);

    let forced = run(
        &cfg,
        &RunOptions {
            force: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert!(!forced.skipped);
    assert_eq!(
        fs::read(forced.dir.join(files::DIPOLE_FILE)).unwrap(),
        fs::read(first.dir.join(files::DIPOLE_FILE)).unwrap()
    );
}

fn restart_matches_uninterrupted(model: &str, extra: &[&str]) {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut o = vec![model, "propagator.checkpoint_every=60"];
    o.extend_from_slice(extra);
    let straight = run(&small(a.path(), &o), &RunOptions::default()).unwrap();

    let cfg = small(b.path(), &o);
    let err = run(
        &cfg,
        &RunOptions {
            stop_after: Some(150),
            ..RunOptions::default()
        },
    )
    .unwrap_err();
    assert!(matches!(err, RunError::Interrupted { steps: 150 }), "{err}");
    let dir = hhg::runner::run_dir(&cfg);
    let partial = read_manifest(&dir).unwrap().unwrap();
    assert_eq!(partial.status, RunStatus::Incomplete);
    assert_eq!(partial.steps_completed, 150);
    let (ck, tag) = Checkpoint::from_bytes(&fs::read(dir.join(files::CHECKPOINT_FILE)).unwrap()).unwrap();
    assert_eq!(tag, cfg.hash());
    assert_eq!(ck.state.step, 150);
    assert_eq!(ck.record.len(), 151);
    let again = Checkpoint::from_bytes(&ck.to_bytes(&tag)).unwrap();
    assert_eq!(again.0, ck);

    let resumed = run(&cfg, &RunOptions::default()).unwrap();
    assert!(resumed.manifest.notes.iter().any(|n| n.contains("resumed")));
    assert!(!dir.join(files::CHECKPOINT_FILE).exists());
    for name in [files::DIPOLE_FILE, files::SPECTRUM_FILE, files::SPECTROGRAM_FILE] {
        assert_eq!(
            fs::read(resumed.dir.join(name)).unwrap(),
            fs::read(straight.dir.join(name)).unwrap(),
            "{name}"
        );
    }
    assert_eq!(resumed.manifest.ionization, straight.manifest.ionization);
}

#[test]
fn sae_restart_is_bit_identical() {
    restart_matches_uninterrupted("model=sae", &[]);
}

#[test]
fn tddft_restart_is_bit_identical() {
    restart_matches_uninterrupted("model=tddft", &["basis.l_max=2", "basis.n_splines=40"]);
}

#[test]
fn failed_propagation_leaves_checkpoint_and_incomplete_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small(
        tmp.path(),
        &[
            "propagator.dt=5.0",
            "propagator.krylov_dim=4",
            "propagator.max_halvings=0",
            "propagator.residual_tol=1e-14",
            "propagator.spectral_filter=false",
        ],
    );
    let err = run(&cfg, &RunOptions::default()).unwrap_err();
    assert!(matches!(err, RunError::Physics(_)), "{err}");
    assert_eq!(err.exit_code(), 3);
    let dir = hhg::runner::run_dir(&cfg);
    let m = read_manifest(&dir).unwrap().unwrap();
    assert_eq!(m.status, RunStatus::Incomplete);
    assert!(m.notes.iter().any(|n| n.starts_with("aborted")));
    assert!(dir.join(files::CHECKPOINT_FILE).exists());
    assert!(!dir.join(files::DIPOLE_FILE).exists());
}

#[test]
fn sweeps_tabulate_every_point_independently_of_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let base = small(tmp.path(), &[]);
    let values = vec!["0".to_string(), "1.5707963267948966".to_string()];
    let one = sweep(&base, SweepAxis::Cep, &values, 1, &RunOptions::default()).unwrap();
    assert_eq!(one.points.len(), 2);
    assert!(one.points.iter().all(|p| p.manifest.is_some()));
    assert!(one.table_path.exists());
    assert_eq!(one.table.lines().filter(|l| !l.starts_with('#')).count(), 2);

    let two = sweep(
        &base,
        SweepAxis::Cep,
        &values,
        2,
        &RunOptions {
            force: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    for (p, q) in one.points.iter().zip(&two.points) {
        let (a, b) = (p.manifest.as_ref().unwrap(), q.manifest.as_ref().unwrap());
        assert_eq!(a.config_hash, b.config_hash);
        assert_eq!(a.observables, b.observables);
    }
    assert_eq!(one.contrast, two.contrast);

    let gauges = sweep(
        &base,
        SweepAxis::Gauge,
        &["length".into(), "velocity".into(), "sideways".into()],
        2,
        &RunOptions::default(),
    );
    // an invalid value is a configuration error for the whole sweep
    assert!(matches!(gauges, Err(RunError::Config(_))));
}

#[test]
fn analyze_and_compare_work_on_existing_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run(&small(tmp.path(), &[]), &RunOptions::default()).unwrap();
    let b = run(&small(tmp.path(), &["gauge=velocity"]), &RunOptions::default()).unwrap();

    let stored = hhg::runner::read_run_config(&a.dir).unwrap();
    let (out, m) = analyze(&a.dir, &stored).unwrap();
    assert_eq!(out, a.dir);
    assert_eq!(m.observables, a.manifest.observables);

    let hann = RunConfig::parse_with_overrides(&stored.to_toml(), &["observables.spectrum_window=hann".into()]).unwrap();
    let (out, m) = analyze(&a.dir, &hann).unwrap();
    assert_ne!(out, a.dir);
    assert_eq!(m.config_hash, hann.hash());
    assert!(out.join(files::SPECTRUM_FILE).exists());

    let physics = RunConfig::parse_with_overrides(&stored.to_toml(), &["pulse.cep=1.0".into()]).unwrap();
    assert!(matches!(analyze(&a.dir, &physics), Err(RunError::Config(_))));

    let table = compare(&a.dir, &b.dir).unwrap();
    assert!(table.contains("Length") && table.contains("Velocity"));
    assert!(table.lines().any(|l| l.starts_with("H3_dB")));
}
