use std::path::{Path, PathBuf};

use clap::Parser;

use crate::args::{Cli, Command, RerunArgs};
use crate::error::{CliError, CliResult};
use crate::run::{digest_file, Invocation, RunManifest, MANIFEST};

fn absolute(p: &Path) -> CliResult<PathBuf> {
    Ok(if p.is_absolute() { p.to_path_buf() } else { std::env::current_dir()?.join(p) })
}

fn replace_out(argv: &[String], out: &Path) -> CliResult<Vec<String>> {
    let mut next = Vec::with_capacity(argv.len());
    let mut found = false;
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--out" {
            it.next();
            next.push(a.clone());
            next.push(out.display().to_string());
            found = true;
        } else if a.starts_with("--out=") {
            next.push(format!("--out={}", out.display()));
            found = true;
        } else {
            next.push(a.clone());
        }
    }
    if !found {
        return Err(CliError::Data("manifest command has no --out".into()));
    }
    Ok(next)
}

pub fn run(a: &RerunArgs, inv: &Invocation) -> CliResult<()> {
    let old = RunManifest::load(&a.manifest)?;
    let out = absolute(&a.out.out)?;
    let cwd = PathBuf::from(&old.cwd);
    for input in &old.inputs {
        let p = cwd.join(&input.path);
        let now = digest_file(&input.role, &p, &input.path)
            .map_err(|_| CliError::Data(format!("recorded input {} is missing", p.display())))?;
        if now.sha256 != input.sha256 {
            return Err(CliError::Data(format!("recorded input {} changed since the run", p.display())));
        }
    }
    let argv = replace_out(&old.resolved_argv, &out)?;
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Data(format!("manifest command does not parse: {e}")))?;
    if matches!(cli.command, Command::Rerun(_)) {
        return Err(CliError::Usage("refusing to rerun a rerun".into()));
    }
    std::env::set_current_dir(&cwd)?;
    let inner = Invocation { argv: argv.clone(), resolved_argv: argv, config_file: None, threads: inv.threads };
    super::execute(&cli.command, &inner)?;
    let new = RunManifest::load(&out.join(MANIFEST))?;
    let mut diffs = Vec::new();
    for o in &old.outputs {
        match new.outputs.iter().find(|n| n.path == o.path) {
            Some(n) if n.sha256 == o.sha256 => {}
            Some(_) => diffs.push(format!("{} differs", o.path)),
            None => diffs.push(format!("{} missing", o.path)),
        }
    }
    for n in &new.outputs {
        if !old.outputs.iter().any(|o| o.path == n.path) {
            diffs.push(format!("{} is new", n.path));
        }
    }
    if diffs.is_empty() {
        println!("rerun reproduced {} outputs byte for byte", old.outputs.len());
        Ok(())
    } else {
        Err(CliError::Mismatch(diffs.join("; ")))
    }
}
