//! Backend that drives the installed chemistry programs.

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::mdp::mdp_value;
use super::process::{run, ProcessSpec};
use super::topology::index_group_names;
use super::{AnalysisKind, MdBackend, Stage, MMPBSA_RESULTS};
use crate::tools::{FailureKind, ToolContext, ToolFailure};

const RCSB_DOWNLOAD: &str = "https://files.rcsb.org/download";

/// Executable locations; relative names are looked up on `PATH`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecutablePaths {
    pub obabel: PathBuf,
    pub antechamber: PathBuf,
    pub parmchk2: PathBuf,
    pub tleap: PathBuf,
    pub acpype: PathBuf,
    pub gmx: PathBuf,
    pub gmx_mmpbsa: PathBuf,
}

impl Default for ExecutablePaths {
    fn default() -> Self {
        Self {
            obabel: "obabel".into(),
            antechamber: "antechamber".into(),
            parmchk2: "parmchk2".into(),
            tleap: "tleap".into(),
            acpype: "acpype".into(),
            gmx: "gmx".into(),
            gmx_mmpbsa: "gmx_MMPBSA".into(),
        }
    }
}

impl ExecutablePaths {
    fn probes(&self) -> Vec<(&'static str, &PathBuf, &'static str)> {
        vec![
            ("obabel", &self.obabel, "-V"),
            ("antechamber", &self.antechamber, "-h"),
            ("parmchk2", &self.parmchk2, "-h"),
            ("tleap", &self.tleap, "-h"),
            ("acpype", &self.acpype, "--version"),
            ("gmx", &self.gmx, "--version"),
            ("gmx_MMPBSA", &self.gmx_mmpbsa, "--version"),
        ]
    }

    /// Checks that every executable can be started. The exit status of the
    /// probe is ignored; only a failure to spawn counts as missing.
    pub fn preflight(&self) -> Result<(), String> {
        let mut missing = Vec::new();
        for (tool, path, flag) in self.probes() {
            let spawned = std::process::Command::new(path)
                .arg(flag)
                .stdin(std::process::Stdio::null())
                .stdout(std::process::Stdio::null())
                .stderr(std::process::Stdio::null())
                .status();
            if let Err(e) = spawned {
                missing.push(format!("  {tool}: {} ({e})", path.display()));
            }
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(format!(
                "required executables could not be started:\n{}\nset their paths in the [executables] section of the configuration",
                missing.join("\n")
            ))
        }
    }
}

#[derive(Debug, Clone)]
pub struct RealBackend {
    paths: ExecutablePaths,
    download_timeout: Duration,
}

impl RealBackend {
    /// Builds the backend after a successful preflight.
    pub fn new(paths: ExecutablePaths) -> Result<Self, String> {
        paths.preflight()?;
        Ok(Self::unchecked(paths))
    }

    pub fn unchecked(paths: ExecutablePaths) -> Self {
        Self {
            paths,
            download_timeout: Duration::from_secs(60),
        }
    }

    pub fn paths(&self) -> &ExecutablePaths {
        &self.paths
    }

    fn exec(&self, ctx: &ToolContext<'_>, spec: ProcessSpec) -> Result<String, ToolFailure> {
        run(&spec, ctx.sandbox.root(), ctx.timeout).map(|o| o.combined())
    }

    fn gmx(&self, ctx: &ToolContext<'_>, args: &[&str], stdin: Option<&str>) -> Result<String, ToolFailure> {
        let mut spec = ProcessSpec::new(&self.paths.gmx, args);
        if let Some(input) = stdin {
            spec = spec.stdin(input);
        }
        self.exec(ctx, spec)
    }

    fn energy(&self, ctx: &ToolContext<'_>, edr: &str, term: &str, out: &str) -> Result<(), ToolFailure> {
        self.gmx(ctx, &["energy", "-f", edr, "-o", out], Some(&format!("{term}\n0\n")))
            .map(|_| ())
    }
}

fn group_number(ndx: &str, name: &str) -> Result<usize, ToolFailure> {
    index_group_names(ndx)
        .iter()
        .position(|g| g == name)
        .ok_or_else(|| ToolFailure::precondition(format!("index.ndx has no group '{name}'")))
}

impl MdBackend for RealBackend {
    fn label(&self) -> &'static str {
        "real"
    }

    fn download_structure(&self, _ctx: &ToolContext<'_>, pdb_id: &str) -> Result<String, ToolFailure> {
        let url = format!("{RCSB_DOWNLOAD}/{}.pdb", pdb_id.to_ascii_uppercase());
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.download_timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut resp = agent
            .get(&url)
            .call()
            .map_err(|e| ToolFailure::new(FailureKind::Network, format!("GET {url} failed: {e}")))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| ToolFailure::new(FailureKind::Network, format!("reading {url} failed: {e}")))?;
        if status != 200 {
            return Err(ToolFailure::new(
                FailureKind::Network,
                format!("HTTP {status} from {url}"),
            ));
        }
        Ok(body)
    }

    fn protonate(&self, ctx: &ToolContext<'_>, input: &str, output: &str, ph: f64) -> Result<(), ToolFailure> {
        let ph = format!("{ph:.1}");
        self.exec(
            ctx,
            ProcessSpec::new(&self.paths.obabel, &[input, "-O", output, "-p", &ph]),
        )?;
        Ok(())
    }

    fn parameterize(
        &self,
        ctx: &ToolContext<'_>,
        input: &str,
        resname: &str,
        net_charge: i64,
    ) -> Result<(), ToolFailure> {
        let charge = net_charge.to_string();
        self.exec(
            ctx,
            ProcessSpec::new(
                &self.paths.antechamber,
                &[
                    "-i", input, "-fi", "pdb", "-o", "ligand.mol2", "-fo", "mol2", "-c", "bcc", "-at", "gaff2",
                    "-rn", resname, "-nc", &charge, "-s", "2",
                ],
            ),
        )?;
        self.exec(
            ctx,
            ProcessSpec::new(
                &self.paths.parmchk2,
                &["-i", "ligand.mol2", "-f", "mol2", "-o", "ligand.frcmod", "-s", "gaff2"],
            ),
        )?;
        Ok(())
    }

    fn tleap(&self, ctx: &ToolContext<'_>, script: &str) -> Result<String, ToolFailure> {
        ctx.sandbox.write("leap.in", script)?;
        self.exec(ctx, ProcessSpec::new(&self.paths.tleap, &["-f", "leap.in"]))
    }

    fn convert(&self, ctx: &ToolContext<'_>) -> Result<(), ToolFailure> {
        self.exec(
            ctx,
            ProcessSpec::new(
                &self.paths.acpype,
                &["-p", "system.prmtop", "-x", "system.inpcrd", "-b", "system", "-c", "user"],
            ),
        )?;
        let top = ctx.sandbox.read_bytes("system.amb2gmx/system_GMX.top")?;
        let gro = ctx.sandbox.read_bytes("system.amb2gmx/system_GMX.gro")?;
        ctx.sandbox.write("topol.top", top)?;
        ctx.sandbox.write("solv_ions.gro", gro)?;
        Ok(())
    }

    fn md_stage(&self, ctx: &ToolContext<'_>, stage: Stage) -> Result<String, ToolFailure> {
        let stem = stage.deffnm();
        let tpr = format!("{stem}.tpr");
        let mdp = stage.mdp_file();
        let coords = stage.input_coordinates();
        let mut args = vec![
            "grompp", "-f", &mdp, "-c", coords, "-r", coords, "-p", "topol.top", "-o", &tpr, "-maxwarn", "1",
        ];
        if stage != Stage::Em {
            args.extend(["-n", "index.ndx"]);
        }
        let cpt = match stage {
            Stage::Npt => Some("nvt.cpt"),
            Stage::Prod => Some("npt.cpt"),
            _ => None,
        };
        if let Some(c) = cpt {
            args.extend(["-t", c]);
        }
        let mut log = self.gmx(ctx, &args, None)?;
        log.push_str(&self.gmx(ctx, &["mdrun", "-deffnm", stem], None)?);
        let edr = format!("{stem}.edr");
        match stage {
            Stage::Em => self.energy(ctx, &edr, "Potential", "potential.xvg")?,
            Stage::Nvt => self.energy(ctx, &edr, "Temperature", "temperature.xvg")?,
            Stage::Npt => {
                self.energy(ctx, &edr, "Pressure", "pressure.xvg")?;
                self.energy(ctx, &edr, "Density", "density.xvg")?;
            }
            Stage::Prod => {}
        }
        if let Ok(engine_log) = ctx.sandbox.read_string(&format!("{stem}.log")) {
            log.push_str(&engine_log);
        }
        Ok(log)
    }

    fn analysis(&self, ctx: &ToolContext<'_>, kind: AnalysisKind) -> Result<(), ToolFailure> {
        let out = kind.output();
        let base = ["-s", "md.tpr", "-f", "md.xtc", "-n", "index.ndx"];
        let (tool, extra, groups): (&str, Vec<&str>, &str) = match kind {
            AnalysisKind::Rmsd => ("rms", vec!["-o", &out, "-tu", "ns"], "Backbone\nBackbone\n"),
            AnalysisKind::Rmsf => ("rmsf", vec!["-o", &out, "-res"], "Protein\n"),
            AnalysisKind::Gyrate => ("gyrate", vec!["-o", &out, "-tu", "ns"], "Protein\n"),
            AnalysisKind::Hbond => ("hbond", vec!["-num", &out, "-tu", "ns"], "Protein\nProtein\n"),
        };
        let mut args = vec![tool];
        args.extend(base);
        args.extend(extra);
        self.gmx(ctx, &args, Some(groups))?;
        Ok(())
    }

    fn mmpbsa(&self, ctx: &ToolContext<'_>, temperature: f64) -> Result<(), ToolFailure> {
        let ndx = ctx.sandbox.read_string("index.ndx")?;
        let receptor = group_number(&ndx, "Protein")?.to_string();
        let ligand = group_number(&ndx, "Ligand")?.to_string();
        let input = format!(
            "&general\n  sys_name=\"mdagent\",\n  temperature={temperature:.2},\n/\n&pb\n  istrng=0.150,\n/\n"
        );
        ctx.sandbox.write("mmpbsa.in", input)?;
        self.exec(
            ctx,
            ProcessSpec::new(
                &self.paths.gmx_mmpbsa,
                &[
                    "-O", "-i", "mmpbsa.in", "-cs", "md.tpr", "-ci", "index.ndx", "-cg", &receptor, &ligand,
                    "-ct", "md.xtc", "-cp", "topol.top", "-o", MMPBSA_RESULTS, "-nogui",
                ],
            ),
        )?;
        Ok(())
    }
}

/// Temperature recorded in a stage parameter file.
pub(crate) fn mdp_temperature(mdp: &str) -> Option<f64> {
    mdp_value(mdp, "ref_t")?.split_whitespace().next()?.parse().ok()
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use std::os::unix::fs::PermissionsExt;

    #[test]
    fn preflight_names_missing_programs() {
        let paths = ExecutablePaths {
            obabel: "true".into(),
            antechamber: "true".into(),
            parmchk2: "true".into(),
            tleap: "true".into(),
            acpype: "true".into(),
            gmx: "/nonexistent/gmx".into(),
            gmx_mmpbsa: "/nonexistent/gmx_MMPBSA".into(),
        };
        let err = paths.preflight().unwrap_err();
        assert!(err.contains("gmx: /nonexistent/gmx"));
        assert!(err.contains("gmx_MMPBSA"));
        assert!(!err.contains("obabel"));
        assert!(RealBackend::new(paths).is_err());
    }

    #[test]
    fn fatal_leap_exit_is_routed() {
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("tleap");
        std::fs::write(&script, "#!/bin/sh\necho 'FATAL:  Atom .R<UNL 1>.A<CL1 20> does not have a type.'\nexit 1\n")
            .unwrap();
        std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
        let backend = RealBackend::unchecked(ExecutablePaths { tleap: script, ..Default::default() });
        let sb = crate::sandbox::Sandbox::create(dir.path(), "run").unwrap();
        let ctx = ToolContext { sandbox: &sb, timeout: Duration::from_secs(5), tool_name: "build_system" };
        let err = backend.tleap(&ctx, "quit\n").unwrap_err();
        assert!(err.message.contains("does not have a type"));
        assert_eq!(mdp_temperature("ref_t = 310 310\n"), Some(310.0));
    }
}
