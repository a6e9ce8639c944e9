use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use emacfem::config::parse_config;
use emacfem::output::diff_csv;
use emacfem::run::{load_mesh, run};
use emacfem::Error;

#[derive(Parser)]
#[command(
    name = "emacfem",
    version,
    about = "Navier-Stokes solver with local conservation diagnostics"
)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a JSON config file.
    Run { config: PathBuf },
    /// Print the largest absolute difference per column of two balance files.
    Diff { a: PathBuf, b: PathBuf },
    /// Print mesh statistics.
    MeshInfo { mesh: PathBuf },
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config } => {
            let cfg = parse_config(&config)?;
            let out = run(&cfg)?;
            println!(
                "{} steps written to {}",
                out.reports.len(),
                out.output_dir.display()
            );
        }
        Command::Diff { a, b } => {
            for (col, d) in diff_csv(&a, &b)? {
                println!("{col:<20} {d:.3e}");
            }
        }
        Command::MeshInfo { mesh } => {
            let m = load_mesh(&mesh)?;
            let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for v in m.vertices() {
                for d in 0..2 {
                    lo[d] = lo[d].min(v[d]);
                    hi[d] = hi[d].max(v[d]);
                }
            }
            println!("vertices            {}", m.n_vertices());
            println!("triangles           {}", m.n_triangles());
            println!("edges               {}", m.n_edges());
            println!("euler characteristic {}", m.euler_characteristic());
            println!("area                {:.12e}", m.total_area());
            println!(
                "bounding box        [{}, {}] x [{}, {}]",
                lo[0], hi[0], lo[1], hi[1]
            );
            println!("P2 velocity dofs    {}", 2 * m.n_p2_nodes());
            for tag in m.boundary_tags() {
                let n = m.boundary_edges().iter().filter(|e| e.tag == tag).count();
                println!("boundary '{tag}': {n} edges");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
