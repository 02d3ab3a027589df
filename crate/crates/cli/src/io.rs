//! File formats: events JSONL, graph catalog JSON, bit-layout JSON, QUBO
//! problem dumps, and the results/diagnostics CSVs.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use efpqubo_core::anneal::StepDiagnostics;
use efpqubo_core::encoding::{BitLayout, Scheme};
use efpqubo_core::events::{JetEvent, Particle};
use efpqubo_core::pimc::PimcStepDiagnostics;
use efpqubo_core::qubo::QuboProblem;

use crate::error::{CliError, CliResult};

/// The pinned results schema.
pub const RESULTS_HEADER: &str = "relation,solver,scheme,lambda,run,nnz,mse,reg_loss,wall_ms";

#[derive(Serialize, Deserialize)]
struct RawEvent {
    particles: Vec<(f64, f64, f64)>,
}

/// Write events as JSONL, one `{"particles": [[pt, y, phi], ...]}` object
/// per line, 17 significant digits.
pub fn write_events(path: &Path, events: &[JetEvent]) -> CliResult<()> {
    let mut out = String::new();
    for ev in events {
        out.push_str("{\"particles\": [");
        for (i, p) in ev.particles().iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!("[{:.16e}, {:.16e}, {:.16e}]", p.pt(), p.y(), p.phi()));
        }
        out.push_str("]}\n");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a JSONL events file; parse or validity errors name the line number
/// and the violated constraint.
pub fn read_events(path: &Path) -> CliResult<Vec<JetEvent>> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::config(format!("cannot open {}: {e}", path.display())))?;
    let mut events = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawEvent = serde_json::from_str(&line).map_err(|e| {
            CliError::config(format!("{}:{}: invalid event JSON: {e}", path.display(), lineno + 1))
        })?;
        let particles: Vec<Particle> = raw
            .particles
            .into_iter()
            .map(|(pt, y, phi)| Particle::new(pt, y, phi))
            .collect::<Result<_, _>>()
            .map_err(|e| {
                CliError::config(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
        events.push(JetEvent::new(particles).map_err(|e| {
            CliError::config(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?);
    }
    if events.is_empty() {
        return Err(CliError::config(format!("{}: no events", path.display())));
    }
    Ok(events)
}

/// One catalog graph: 1-based vertex labels.
#[derive(Debug, Serialize, Deserialize)]
pub struct CatalogGraph {
    pub id: String,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

/// Load and validate a graph catalog JSON file.
pub fn read_graph_catalog(path: &Path) -> CliResult<Vec<CatalogGraph>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let graphs: Vec<CatalogGraph> = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid catalog {}: {e}", path.display())))?;
    for g in &graphs {
        // constructing validates vertex bounds
        efpqubo_core::efp::Multigraph::new(g.n, &g.edges)
            .map_err(|e| CliError::config(format!("catalog graph {:?}: {e}", g.id)))?;
    }
    Ok(graphs)
}

#[derive(Serialize, Deserialize)]
struct RawLayout {
    scheme: String,
    i_min: i32,
    i_max: i32,
    k_coeffs: usize,
    cross_penalty: f64,
}

/// Write a power-of-two bit layout as JSON.
pub fn write_layout(path: &Path, layout: &BitLayout) -> CliResult<()> {
    let (i_min, i_max) = layout.exponent_range().ok_or_else(|| {
        CliError::config("only power-of-two layouts serialize to layout JSON")
    })?;
    let raw = RawLayout {
        scheme: layout.scheme().name().into(),
        i_min,
        i_max,
        k_coeffs: layout.k_coeffs(),
        cross_penalty: layout.cross_penalty(),
    };
    fs::write(path, serde_json::to_string_pretty(&raw).unwrap())?;
    Ok(())
}

/// Read a bit layout from JSON.
pub fn read_layout(path: &Path) -> CliResult<BitLayout> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let raw: RawLayout = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid layout {}: {e}", path.display())))?;
    let scheme = Scheme::from_name(&raw.scheme)?;
    Ok(BitLayout::power_of_two(scheme, raw.i_min, raw.i_max, raw.k_coeffs)?
        .with_cross_penalty(raw.cross_penalty)?)
}

#[derive(Serialize, Deserialize)]
struct RawProblem {
    n: usize,
    offset: f64,
    terms: Vec<(usize, usize, f64)>,
}

/// Dump a QUBO as `{"n", "offset", "terms": [[i, j, J], ...]}` (i >= j).
pub fn write_problem(path: &Path, problem: &QuboProblem) -> CliResult<()> {
    let raw = RawProblem {
        n: problem.n(),
        offset: problem.offset(),
        terms: problem.terms().filter(|&(_, _, v)| v != 0.0).collect(),
    };
    fs::write(path, serde_json::to_string(&raw).unwrap())?;
    Ok(())
}

/// Read a QUBO problem dump.
pub fn read_problem(path: &Path) -> CliResult<QuboProblem> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let raw: RawProblem = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid problem {}: {e}", path.display())))?;
    let mut problem = QuboProblem::zero(raw.n);
    problem.add_offset(raw.offset);
    for (i, j, v) in raw.terms {
        if i >= raw.n || j > i {
            return Err(CliError::config(format!("problem term ({i}, {j}) out of range")));
        }
        problem.add_coefficient(i, j, v);
    }
    Ok(problem)
}

/// Write annealer diagnostics CSV.
pub fn write_anneal_diagnostics(path: &Path, diags: &[StepDiagnostics]) -> CliResult<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "step,beta,best_energy,mean_energy,population_size,unique_replicas")?;
    for d in diags {
        writeln!(
            f,
            "{},{:e},{:e},{:e},{},{}",
            d.step, d.beta, d.best_energy, d.mean_energy, d.population_size, d.unique_replicas
        )?;
    }
    Ok(())
}

/// Write PIMC diagnostics CSV.
pub fn write_pimc_diagnostics(path: &Path, diags: &[PimcStepDiagnostics]) -> CliResult<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "step,gamma,j_scale,best_energy,mean_slice_magnetization_alignment")?;
    for d in diags {
        writeln!(
            f,
            "{},{:e},{:e},{:e},{:e}",
            d.step, d.gamma, d.j_scale, d.best_energy, d.mean_alignment
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use efpqubo_core::events::generate_events;

    #[test]
    fn events_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let events = generate_events(20, (2, 8), 100.0, 0.4, 11).unwrap();
        write_events(&path, &events).unwrap();
        let back = read_events(&path).unwrap();
        assert_eq!(back.len(), events.len());
        for (a, b) in events.iter().zip(&back) {
            for (pa, pb) in a.particles().iter().zip(b.particles()) {
                assert_eq!(pa.pt(), pb.pt());
                assert_eq!(pa.y(), pb.y());
                assert_eq!(pa.phi(), pb.phi());
            }
        }
    }

    #[test]
    fn bad_event_line_names_line_and_constraint() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        fs::write(
            &path,
            "{\"particles\": [[1.0, 0.0, 0.0]]}\n{\"particles\": [[-1.0, 0.0, 0.0]]}\n",
        )
        .unwrap();
        let err = read_events(&path).unwrap_err();
        assert_eq!(err.exit_code, 2);
        assert!(err.message.contains(":2:"), "{}", err.message);
        assert!(err.message.contains("pt"), "{}", err.message);
    }

    #[test]
    fn shipped_catalog_matches_library() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/graphs.json");
        let catalog = read_graph_catalog(&path).unwrap();
        let lib = efpqubo_core::efp::graphs::catalog();
        assert_eq!(catalog.len(), lib.len());
        for (g, (id, graph)) in catalog.iter().zip(&lib) {
            assert_eq!(&g.id, id);
            let parsed = efpqubo_core::efp::Multigraph::new(g.n, &g.edges).unwrap();
            assert_eq!(&parsed, graph, "catalog mismatch for {id}");
        }
    }

    #[test]
    fn layout_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("layout.json");
        let layout = BitLayout::power_of_two(Scheme::L0Double, -3, 2, 4).unwrap();
        write_layout(&path, &layout).unwrap();
        let back = read_layout(&path).unwrap();
        assert_eq!(back.scheme(), Scheme::L0Double);
        assert_eq!(back.k_coeffs(), 4);
        assert_eq!(back.exponent_range(), Some((-3, 2)));
        assert_eq!(back.cross_penalty(), 2.0);
        // pinned field names
        let text = fs::read_to_string(&path).unwrap();
        for key in ["\"scheme\"", "\"i_min\"", "\"i_max\"", "\"k_coeffs\"", "\"cross_penalty\""] {
            assert!(text.contains(key), "missing {key}");
        }
    }

    #[test]
    fn problem_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("problem.json");
        let mut p = QuboProblem::zero(3);
        p.add_offset(1.5);
        p.add_coefficient(0, 0, -1.0);
        p.add_coefficient(2, 1, 0.25);
        write_problem(&path, &p).unwrap();
        let back = read_problem(&path).unwrap();
        assert_eq!(back.n(), 3);
        assert_eq!(back.offset(), 1.5);
        assert_eq!(back.coefficient(0, 0), -1.0);
        assert_eq!(back.coefficient(2, 1), 0.25);
        assert_eq!(back.coefficient(1, 1), 0.0);
    }
}
