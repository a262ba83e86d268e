use std::path::Path;
use std::process::{Command, Output};

fn dbm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("dbm runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn fixtures(dir: &Path) {
    write(
        dir,
        "phi.txt",
        "ambient projective 1\nx1^2 + 5*x2^2\nx2^2\n",
    );
    write(dir, "id.txt", "ambient affine 5\nx1\nx2\nx3\nx4\nx5\n");
    write(
        dir,
        "shift.txt",
        "ambient affine 5\nx1 + 1\nx2\nx3\nx4\nx5\n",
    );
    write(
        dir,
        "sphere.txt",
        "ambient affine 5\n1 - x1^2 - x2^2 - x3^2 - x4^2 - x5^2\n",
    );
    write(
        dir,
        "units.txt",
        "1,0,0,0,0\n-1,0,0,0,0\n0,1,0,0,0\n0,-1,0,0,0\n0,0,1,0,0\n0,0,-1,0,0\n0,0,0,1,0\n0,0,0,-1,0\n0,0,0,0,1\n0,0,0,0,-1\n",
    );
}

#[test]
fn cycle_scan_resumes_and_ignores_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixtures(d);
    let scan = |cache: &str, bound: &str, workers: &str| {
        dbm(
            d,
            &[
                "cycle-scan",
                "--map-file",
                "phi.txt",
                "--point",
                "[1:1]",
                "--bound",
                bound,
                "--cache",
                cache,
                "--workers",
                workers,
            ],
        )
    };
    let o = scan("a.csv", "10", "1");
    assert!(o.status.success());
    let text = std::fs::read_to_string(d.join("a.csv")).unwrap();
    assert!(text.contains("\n3,1,2,0\n") && text.contains("\n7,1,1,0\n"));
    let o = scan("a.csv", "10", "1");
    assert!(stdout(&o).contains("new=0"));
    assert_eq!(std::fs::read_to_string(d.join("a.csv")).unwrap(), text);

    assert!(scan("a.csv", "3000", "1").status.success());
    assert!(scan("b.csv", "3000", "4").status.success());
    assert_eq!(
        std::fs::read_to_string(d.join("a.csv")).unwrap(),
        std::fs::read_to_string(d.join("b.csv")).unwrap()
    );

    let empty = scan("c.csv", "1", "1");
    assert!(stdout(&empty).contains("primes=0"));

    let wrong = dbm(
        d,
        &[
            "cycle-scan",
            "--map-file",
            "phi.txt",
            "--point",
            "[2:1]",
            "--bound",
            "10",
            "--cache",
            "a.csv",
        ],
    );
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn smooth_figure_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixtures(d);
    let o = dbm(
        d,
        &[
            "cycle-scan",
            "--map-file",
            "phi.txt",
            "--point",
            "1:1",
            "--bound",
            "2000",
            "--cache",
            "s.csv",
        ],
    );
    assert!(o.status.success());
    let o = dbm(
        d,
        &[
            "smooth-figure",
            "--cache",
            "s.csv",
            "--alpha",
            "1/3",
            "--d1",
            "1",
            "--out",
            "fig",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("predicted_slope=0.594534891892"));
    let csv = std::fs::read_to_string(d.join("fig.csv")).unwrap();
    assert!(csv.starts_with("x,log_S,predicted_logS\n"));
    let svg = std::fs::read_to_string(d.join("fig.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(
        doc.descendants()
            .filter(|n| n.has_tag_name("polyline"))
            .count(),
        2
    );

    write(d, "empty.csv", "# format=1\n# map_digest=0000000000000001\n# ambient=affine 1\n# point=0\nprime,tail,cycle,overrun\n");
    let o = dbm(
        d,
        &[
            "smooth-figure",
            "--cache",
            "empty.csv",
            "--alpha",
            "1/3",
            "--out",
            "none",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn obstruct_exit_codes_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixtures(d);
    let o = dbm(
        d,
        &[
            "obstruct",
            "--map-file",
            "id.txt",
            "--point",
            "1,1,1,1,1",
            "--variety-file",
            "sphere.txt",
            "--bound",
            "50",
            "--out",
            "r.txt",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("outcome=found_prime\nm=3\n"));
    assert_eq!(std::fs::read_to_string(d.join("r.txt")).unwrap(), text);

    let args = [
        "obstruct",
        "--map-file",
        "shift.txt",
        "--point",
        "0,90,60,30,0",
        "--variety-file",
        "sphere.txt",
        "--bound",
        "10",
    ];
    let o = dbm(d, &args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("outcome=not_found\n"));
    let mut with_points = args.to_vec();
    with_points.extend(["--integral-points", "units.txt"]);
    let o = dbm(d, &with_points);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("outcome=found_by_integral_points\nm=7\n"));

    let o = dbm(
        d,
        &[
            "obstruct",
            "--map-file",
            "missing.txt",
            "--point",
            "1",
            "--variety-file",
            "sphere.txt",
            "--bound",
            "5",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |out: &str, workers: &str| {
        dbm(
            d,
            &[
                "experiment",
                "--count",
                "6",
                "--bound",
                "80",
                "--seed",
                "11",
                "--inject-identity",
                "--workers",
                workers,
                "--out",
                out,
            ],
        )
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "3");
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let csv = std::fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(csv, std::fs::read_to_string(d.join("b.csv")).unwrap());
    let row0 = csv.lines().nth(1).unwrap();
    let cells: Vec<&str> = row0.split(',').collect();
    assert_eq!((cells[0], cells[3], cells[4]), ("0", "3", "3"));
}

#[test]
fn heuristic_modes_and_warning() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = dbm(
        d,
        &[
            "heuristic",
            "--d1",
            "3",
            "--d2",
            "2",
            "--alpha",
            "1/3",
            "--t",
            "10",
            "--t-max",
            "500",
        ],
    );
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("lengths=model"));
    assert!(!text.contains("warning="));

    let o = dbm(
        d,
        &[
            "heuristic",
            "--d1",
            "2",
            "--d2",
            "1",
            "--alpha",
            "1/3",
            "--t",
            "10",
            "--t-max",
            "500",
        ],
    );
    assert!(stdout(&o).contains("warning="));

    let mut cache = String::from("# format=1\n# map_digest=0000000000000001\n# ambient=projective 1\n# point=1,1\nprime,tail,cycle,overrun\n");
    for p in dbm_core::modarith::sieve_primes(500).unwrap() {
        cache.push_str(&format!("{p},0,1,0\n"));
    }
    write(d, "ones.csv", &cache);
    let o = dbm(
        d,
        &[
            "heuristic",
            "--d1",
            "2",
            "--d2",
            "1",
            "--alpha",
            "1/3",
            "--t",
            "10",
            "--t-max",
            "500",
            "--cache",
            "ones.csv",
        ],
    );
    let text = stdout(&o);
    assert!(text.contains("lengths=scan"));
    assert!(text.contains("log_cycle_lcm=0\n"));
    assert!(text.contains("prob_empty_composite=1\n"));

    let o = dbm(
        d,
        &[
            "heuristic",
            "--d1",
            "1",
            "--d2",
            "2",
            "--alpha",
            "1/3",
            "--t",
            "10",
            "--t-max",
            "500",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dickman_and_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = dbm(d, &["dickman", "2"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - (1.0 - 2f64.ln())).abs() < 1e-11);
    let a = dbm(
        d,
        &[
            "baseline",
            "--n",
            "500",
            "--trials",
            "50",
            "--seed",
            "3",
            "--workers",
            "1",
        ],
    );
    let b = dbm(
        d,
        &[
            "baseline",
            "--n",
            "500",
            "--trials",
            "50",
            "--seed",
            "3",
            "--workers",
            "2",
        ],
    );
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with("n,trials,mean_tail,mean_cycle,mean_rho,rho_ratio\n500,50,"));
}
