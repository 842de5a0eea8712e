//! Loading a bundled profile, overriding values and driving the command
//! line from code.

use satcox::config::RunConfig;

fn main() -> satcox::Result<()> {
    let cfg = RunConfig::layered(Some("table1"), None, &["link.gain_db=25".into(), "model.lambda=50".into()])?;
    cfg.validate()?;
    println!("{}", cfg.to_toml_string()?);
    println!("EIRP {:.1} dBW", cfg.link_budget().eirp_dbw());

    let code = satcox::cli::run(
        ["satcox", "coverage", "--profile", "table1", "--thresholds=0:10:5", "--format", "json"],
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    println!("exit code {code}");
    Ok(())
}
