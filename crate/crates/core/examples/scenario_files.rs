//! Scenario TOML in, JSONL traces and observations out, and back again.

use rangeshape::analysis::{analyze_traces, AnalysisConfig};
use rangeshape::io;
use rangeshape::sim::simulate_all;

const SCENARIO: &str = r#"
n_s = 500
seed = 3
thetas = [1.5707963267948966, 1.2]
polygon = [[0, 0], [40, 0], [40, 40], [0, 40]]
"#;

fn main() -> rangeshape::Result<()> {
    let sc = io::parse_scenario(SCENARIO, "inline")?;
    println!("{} sensors, polygon centred at {:?}", sc.n_s, sc.polygon.centroid());

    let dir = std::env::temp_dir().join("rangeshape_scenario_files");
    std::fs::create_dir_all(&dir)?;
    let traces = simulate_all(&sc);
    let known = sc.known_params();
    let tpath = dir.join("traces.jsonl");
    io::write_traces(&tpath, &traces)?;
    let back = io::read_traces(&tpath)?;
    assert_eq!(back.len(), traces.iter().map(Vec::len).sum::<usize>());

    let obs = analyze_traces(&traces, &known, &AnalysisConfig::default());
    let opath = dir.join("observations.jsonl");
    io::write_observations(&opath, &obs)?;
    assert_eq!(io::read_observations(&opath)?, obs);
    println!(
        "{} reports, {} whole edges, {} vertices, {} adjacencies",
        back.len(),
        obs.edges.len(),
        obs.vertices.len(),
        obs.adjacency.len()
    );
    println!("traces sha256 {}", io::sha256_file(&tpath)?);

    // a typo in a key is reported with its line
    match io::parse_scenario("n_s = 5\nr_maxx = 3\n", "typo.toml") {
        Err(e) => println!("{e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
