//! Line-oriented `section.key = value` configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{config_err, Result};

/// Flat `dotted.key -> value` map, kept sorted so serialization is canonical.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues(pub BTreeMap<String, String>);

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err!("line {}: expected `section.key = value`", no + 1))?;
            let key = key.trim();
            if !key.contains('.') || key.split('.').any(|part| part.is_empty() || part.contains(char::is_whitespace)) {
                return Err(config_err!("line {}: malformed key `{key}`", no + 1));
            }
            if map.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(config_err!("line {}: duplicate key `{key}`", no + 1));
            }
        }
        Ok(Self(map))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.0 {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// A `kind` plus its parameters. `section` is the dotted prefix this `Spec` was
/// read from, used in error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spec {
    pub section: String,
    pub kind: String,
    pub params: BTreeMap<String, String>,
}

impl Spec {
    pub fn new(section: &str, kind: &str) -> Self {
        Self {
            section: section.to_string(),
            kind: kind.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    fn from_keys(section: &str, kv: &BTreeMap<String, String>) -> Result<Self> {
        let prefix = format!("{section}.");
        let mut kind = None;
        let mut params = BTreeMap::new();
        for (k, v) in kv.range(prefix.clone()..) {
            let Some(rest) = k.strip_prefix(&prefix) else { break };
            if rest == "kind" {
                kind = Some(v.clone());
            } else {
                params.insert(rest.to_string(), v.clone());
            }
        }
        let kind = kind.ok_or_else(|| config_err!("missing `{section}.kind`"))?;
        Ok(Self {
            section: section.to_string(),
            kind,
            params,
        })
    }

    fn write_keys(&self, kv: &mut BTreeMap<String, String>) {
        kv.insert(format!("{}.kind", self.section), self.kind.clone());
        for (k, v) in &self.params {
            kv.insert(format!("{}.{k}", self.section), v.clone());
        }
    }

    pub fn key(&self, name: &str) -> String {
        format!("{}.{name}", self.section)
    }

    /// Nested `Spec` under `name.`, if `name.kind` is present.
    pub fn sub(&self, name: &str) -> Result<Option<Spec>> {
        let prefix = format!("{name}.");
        let inner: BTreeMap<String, String> = self
            .params
            .iter()
            .filter_map(|(k, v)| k.strip_prefix(&prefix).map(|r| (format!("{}.{r}", self.key(name)), v.clone())))
            .collect();
        if inner.is_empty() {
            return Ok(None);
        }
        Spec::from_keys(&self.key(name), &inner).map(Some)
    }

    pub fn require_sub(&self, name: &str) -> Result<Spec> {
        self.sub(name)?.ok_or_else(|| config_err!("missing `{}.kind`", self.key(name)))
    }

    /// Rejects parameters outside `allowed`. An entry `name.` admits any key
    /// under that prefix.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for k in self.params.keys() {
            let ok = allowed.iter().any(|a| if a.ends_with('.') { k.starts_with(a) } else { k == a });
            if !ok {
                return Err(config_err!("unknown parameter `{}` for kind `{}`", self.key(k), self.kind));
            }
        }
        Ok(())
    }

    pub fn get<T: FromStr>(&self, name: &str) -> Result<Option<T>> {
        match self.params.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| config_err!("`{}` has invalid value `{v}`", self.key(name))),
        }
    }

    pub fn get_or<T: FromStr>(&self, name: &str, default: T) -> Result<T> {
        Ok(self.get(name)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, name: &str) -> Result<T> {
        self.get(name)?.ok_or_else(|| config_err!("missing `{}`", self.key(name)))
    }

    pub fn str_or<'a>(&'a self, name: &str, default: &'a str) -> &'a str {
        self.params.get(name).map(String::as_str).unwrap_or(default)
    }

    /// Comma- or whitespace-separated list.
    pub fn list<T: FromStr>(&self, name: &str) -> Result<Option<Vec<T>>> {
        self.params
            .get(name)
            .map(|v| parse_list(v).map_err(|_| config_err!("`{}` has invalid list `{v}`", self.key(name))))
            .transpose()
    }

    pub fn require_list<T: FromStr>(&self, name: &str) -> Result<Vec<T>> {
        self.list(name)?.ok_or_else(|| config_err!("missing `{}`", self.key(name)))
    }

    /// Rows separated by `;`.
    pub fn matrix(&self, name: &str) -> Result<Option<Vec<Vec<f64>>>> {
        self.params
            .get(name)
            .map(|v| {
                v.split(';')
                    .map(parse_list)
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| config_err!("`{}` has invalid matrix `{v}`", self.key(name)))
            })
            .transpose()
    }

    pub fn require_matrix(&self, name: &str) -> Result<Vec<Vec<f64>>> {
        self.matrix(name)?.ok_or_else(|| config_err!("missing `{}`", self.key(name)))
    }
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, ()> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| ()))
        .collect()
}

/// Seeds as `a..b` (half-open) or an explicit list.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let seeds = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| config_err!("bad seed range `{s}`"))?;
        let b: u64 = b.trim().parse().map_err(|_| config_err!("bad seed range `{s}`"))?;
        (a..b).collect()
    } else {
        parse_list(s).map_err(|_| config_err!("bad seed list `{s}`"))?
    };
    if seeds.is_empty() {
        return Err(config_err!("`run.seeds` is empty"));
    }
    Ok(seeds)
}

fn format_seeds(seeds: &[u64]) -> String {
    let contiguous = seeds.len() > 1 && seeds.windows(2).all(|w| w[1] == w[0] + 1);
    if contiguous {
        format!("{}..{}", seeds[0], seeds[seeds.len() - 1] + 1)
    } else {
        seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub env: Spec,
    pub agent: Spec,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text)?.0;
        for k in kv.keys() {
            let section = k.split('.').next().unwrap_or("");
            let known = match section {
                "run" => matches!(k.as_str(), "run.horizon" | "run.seeds" | "run.out"),
                "env" | "agent" => true,
                _ => false,
            };
            if !known {
                return Err(config_err!("unknown key `{k}`"));
            }
        }
        let horizon: usize = kv
            .get("run.horizon")
            .ok_or_else(|| config_err!("missing `run.horizon`"))?
            .parse()
            .map_err(|_| config_err!("`run.horizon` must be a positive integer"))?;
        if horizon == 0 {
            return Err(config_err!("`run.horizon` must be a positive integer"));
        }
        let seeds = parse_seeds(kv.get("run.seeds").ok_or_else(|| config_err!("missing `run.seeds`"))?)?;
        Ok(Self {
            env: Spec::from_keys("env", &kv)?,
            agent: Spec::from_keys("agent", &kv)?,
            horizon,
            seeds,
            out: kv.get("run.out").map(PathBuf::from),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut kv = BTreeMap::new();
        kv.insert("run.horizon".to_string(), self.horizon.to_string());
        kv.insert("run.seeds".to_string(), format_seeds(&self.seeds));
        if let Some(out) = &self.out {
            kv.insert("run.out".to_string(), out.display().to_string());
        }
        self.env.write_keys(&mut kv);
        self.agent.write_keys(&mut kv);
        KeyValues(kv).to_text()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SAMPLE: &str = "
# two arms
run.horizon = 100
run.seeds = 0..5
env.kind = bernoulli
env.means = 0.5, 0.6
agent.kind = doubling
agent.inner.kind = ucb1
";

    #[test]
    fn parses_sample() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.seeds, vec![0, 1, 2, 3, 4]);
        assert_eq!(c.env.require_list::<f64>("means").unwrap(), vec![0.5, 0.6]);
        let inner = c.agent.require_sub("inner").unwrap();
        assert_eq!((inner.section.as_str(), inner.kind.as_str()), ("agent.inner", "ucb1"));
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "run.horizon = 1\nenv.kind = x\nagent.kind = y\n",
            "run.horizon = 0\nrun.seeds = 1\nenv.kind = x\nagent.kind = y\n",
            "run.horizon = 1\nrun.seeds = 1\nagent.kind = y\n",
            "run.horizon = 1\nrun.seeds = 1\nenv.kind = x\nagent.kind = y\nfoo.bar = 1\n",
            "run.horizon = 1\nrun.horizon = 2\n",
            "horizon = 1\n",
            "run.horizon 1\n",
        ] {
            assert!(matches!(ExperimentConfig::parse(bad), Err(crate::Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn typed_accessors_name_the_key() {
        let s = Spec::new("agent", "hedge").with("eps", "abc");
        let err = s.get::<f64>("eps").unwrap_err().to_string();
        assert!(err.contains("agent.eps"), "{err}");
        let err = s.check_keys(&["gamma"]).unwrap_err().to_string();
        assert!(err.contains("agent.eps"), "{err}");
        let m = Spec::new("env", "game").with("matrix", "0 1; 1 0");
        assert_eq!(m.require_matrix("matrix").unwrap(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    fn word() -> impl Strategy<Value = String> {
        "[a-z][a-z0-9_-]{0,6}"
    }

    proptest! {
        #[test]
        fn round_trip(
            horizon in 1usize..100_000,
            seeds in prop::collection::vec(0u64..1000, 1..6),
            start in 0u64..100,
            len in 1u64..50,
            contiguous in any::<bool>(),
            env_kind in word(),
            agent_kind in word(),
            params in prop::collection::btree_map(word(), "[0-9a-z.,; -]{0,12}", 0..4),
            out in prop::option::of("[a-z/]{1,10}"),
        ) {
            prop_assume!(!params.contains_key("kind"));
            let seeds = if contiguous { (start..start + len).collect() } else { seeds };
            let clean = |v: &String| v.trim().to_string();
            let mut env = Spec::new("env", &env_kind);
            for (k, v) in &params {
                env = env.with(k, clean(v));
            }
            let mut agent = Spec::new("agent", &agent_kind);
            for (k, v) in &params {
                agent = agent.with(&format!("inner.{k}"), clean(v));
            }
            let c = ExperimentConfig { env, agent, horizon, seeds, out: out.map(PathBuf::from) };
            prop_assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
        }
    }
}
