//! Flat `key = value` run configuration with dotted keys.
//!
//! ```text
//! # comment
//! preset.kind = schottky
//! preset.disk.0.center_re = -1
//! preset.disk.0.center_im = 0
//! preset.disk.0.radius = 0.5
//! ...
//! run.radius = 20
//! ```
//!
//! Schottky disks pair up in order: generator `i` maps the outside of disk
//! `2i` onto the inside of disk `2i + 1`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::moebius::MoebiusMap;
use crate::orbit::DEFAULT_ATOM_CAP;
use crate::presets::{build_preset, Disk, GeneratorSet, PresetKind, PresetSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub preset: PresetSpec,
    pub radius: f64,
    pub atom_cap: usize,
    pub schedule_c: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Smallest orbit radius used for limit-set samples.
    pub sample_depth: Option<f64>,
    /// Smallest orbit radius of the fixed points anchoring the global
    /// formula check.
    pub anchor_depth: Option<f64>,
    /// Depth range for the cusp and global formula checks.
    pub t_range: Option<(f64, f64)>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut fields = Fields::parse(text)?;
        let preset = fields.preset()?;
        let radius = fields.number("run.radius")?.unwrap_or(16.0);
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(fields.error("run.radius", "must be finite and >= 0"));
        }
        let atom_cap = match fields.take("run.atom_cap") {
            Some((line, v)) => v.parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| {
                config_error(line, "run.atom_cap", format!("`{v}` is not a positive integer"))
            })?,
            None => DEFAULT_ATOM_CAP,
        };
        let schedule_c = fields.number("run.schedule_c")?.unwrap_or(2.0);
        let seed = match fields.take("run.seed") {
            Some((line, v)) => parse_seed(&v)
                .ok_or_else(|| config_error(line, "run.seed", format!("`{v}` is not a 64-bit integer")))?,
            None => 0x5eed,
        };
        let out_dir = fields
            .take("run.out_dir")
            .map_or_else(|| PathBuf::from("out"), |(_, v)| PathBuf::from(v));
        let sample_depth = fields.number("check.sample_depth")?;
        let anchor_depth = fields.number("check.anchor_depth")?;
        let t_range = match (fields.number("check.t_min")?, fields.number("check.t_max")?) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => return Err(fields.error("check.t_min", "check.t_min and check.t_max go together")),
        };
        fields.finish()?;
        Ok(Self {
            preset,
            radius,
            atom_cap,
            schedule_c,
            seed,
            out_dir,
            sample_depth,
            anchor_depth,
            t_range,
        })
    }

    pub fn generators(&self) -> Result<GeneratorSet> {
        build_preset(&self.preset)
    }
}

fn parse_seed(v: &str) -> Option<u64> {
    match v.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => v.parse().ok(),
    }
}

fn config_error(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

struct Fields {
    map: BTreeMap<String, (usize, String)>,
    /// Line of `preset.kind`, used for errors about the preset as a whole.
    kind_line: usize,
}

impl Fields {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(config_error(line, content, "expected `key = value`"));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(config_error(line, k, "invalid key"));
            }
            if let Some((first, _)) = map.insert(k.to_string(), (line, v.to_string())) {
                return Err(config_error(line, k, format!("duplicate key (first set on line {first})")));
            }
        }
        let kind_line = map.get("preset.kind").map_or(0, |e| e.0);
        Ok(Self { map, kind_line })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn error(&self, field: &str, message: &str) -> Error {
        config_error(self.kind_line, field, message)
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| config_error(line, key, format!("`{v}` is not a decimal number"))),
        }
    }

    fn required(&mut self, key: &str) -> Result<f64> {
        self.number(key)?
            .ok_or_else(|| config_error(self.kind_line, key, "missing required field"))
    }

    fn complex(&mut self, prefix: &str) -> Result<Complex64> {
        Ok(Complex64::new(
            self.required(&format!("{prefix}_re"))?,
            self.number(&format!("{prefix}_im"))?.unwrap_or(0.0),
        ))
    }

    fn matrix(&mut self, prefix: &str) -> Result<MoebiusMap> {
        let a = self.complex(&format!("{prefix}.a"))?;
        let b = self.complex(&format!("{prefix}.b"))?;
        let c = self.complex(&format!("{prefix}.c"))?;
        let d = self.complex(&format!("{prefix}.d"))?;
        MoebiusMap::new(a, b, c, d).map_err(|e| config_error(self.kind_line, prefix, e.to_string()))
    }

    /// Indices `N` of keys `{prefix}.N.*`, ascending.
    fn indices(&self, prefix: &str) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (k, (line, _)) in &self.map {
            if let Some(rest) = k.strip_prefix(prefix) {
                let n = rest
                    .split('.')
                    .next()
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| config_error(*line, k, "expected a numeric index"))?;
                out.push(n);
            }
        }
        out.sort_unstable();
        out.dedup();
        if out.iter().enumerate().any(|(i, &n)| i != n) {
            return Err(config_error(self.kind_line, prefix, "indices must run 0, 1, 2, ..."));
        }
        Ok(out)
    }

    fn preset(&mut self) -> Result<PresetSpec> {
        let (line, kind) = self
            .take("preset.kind")
            .ok_or_else(|| config_error(0, "preset.kind", "missing required field"))?;
        let kind = PresetKind::from_name(&kind)
            .ok_or_else(|| config_error(line, "preset.kind", format!("unknown preset kind `{kind}`")))?;
        let spec = match kind {
            PresetKind::CyclicParabolic => PresetSpec::CyclicParabolic {
                alpha: self.complex("preset.alpha")?,
            },
            PresetKind::Rank2Parabolic => PresetSpec::Rank2Parabolic {
                alpha: self.complex("preset.alpha")?,
                beta: self.complex("preset.beta")?,
            },
            PresetKind::Schottky => {
                let idx = self.indices("preset.disk.")?;
                if idx.len() % 2 != 0 {
                    return Err(self.error("preset.disk", "disks must come in pairs"));
                }
                let mut disks = Vec::new();
                for n in idx {
                    let p = format!("preset.disk.{n}");
                    disks.push(Disk::new(
                        self.complex(&format!("{p}.center"))?,
                        self.required(&format!("{p}.radius"))?,
                    ));
                }
                PresetSpec::Schottky {
                    pairs: disks.chunks(2).map(|c| (c[0], c[1])).collect(),
                }
            }
            PresetKind::ParabolicHyperbolicFreeProduct => PresetSpec::ParabolicHyperbolicFreeProduct {
                alpha: self.complex("preset.alpha")?,
                h: self.matrix("preset.h")?,
            },
            PresetKind::Custom => {
                let idx = self.indices("preset.gen.")?;
                let generators = idx
                    .into_iter()
                    .map(|n| self.matrix(&format!("preset.gen.{n}")))
                    .collect::<Result<Vec<_>>>()?;
                PresetSpec::Custom { generators }
            }
        };
        build_preset(&spec).map_err(|e| config_error(line, "preset.kind", e.to_string()))?;
        Ok(spec)
    }

    fn finish(self) -> Result<()> {
        match self.map.into_iter().next() {
            Some((k, (line, _))) => Err(config_error(line, &k, "unknown key")),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_schottky_config() {
        let text = "\
# two pairs
preset.kind = schottky
preset.disk.0.center_re = -1
preset.disk.0.radius = 0.5
preset.disk.1.center_re = 1
preset.disk.1.radius = 0.5
preset.disk.2.center_im = -1
preset.disk.2.center_re = 0
preset.disk.2.radius = 0.5
preset.disk.3.center_re = 0
preset.disk.3.center_im = 1
preset.disk.3.radius = 0.5
run.radius = 12   # depth
run.seed = 0x10
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.radius, 12.0);
        assert_eq!(cfg.seed, 16);
        let PresetSpec::Schottky { pairs } = &cfg.preset else {
            panic!("wrong kind")
        };
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[1].1.center, Complex64::new(0.0, 1.0));
    }

    #[test]
    fn errors_name_line_and_field() {
        let err = RunConfig::parse("run.radius = 3\npreset.kind = hexagonal\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, ref field, .. } if field == "preset.kind"));
        let err = RunConfig::parse("preset.kind = cyclic_parabolic\npreset.alpha_re = x\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, ref field, .. } if field == "preset.alpha_re"));
        let err = RunConfig::parse("preset.kind = cyclic_parabolic\npreset.alpha_re = 1\nrun.depth = 3\n")
            .unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, ref field, .. } if field == "run.depth"));
        let err = RunConfig::parse("preset.kind = cyclic_parabolic\nnonsense\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
    }

    #[test]
    fn invalid_preset_parameters_are_reported() {
        let text = "preset.kind = rank2_parabolic\npreset.alpha_re = 1\npreset.beta_re = 2\n";
        let err = RunConfig::parse(text).unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }), "{err}");
    }
}
