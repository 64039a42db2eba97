use std::collections::HashMap;
use std::io::{Read, Write};

use super::{FiniteContextEnv, Policy};
use crate::episode::{ArmIndex, Context, Environment, Round};
use crate::error::{config_err, domain_err, Error, Result};
use crate::rng::RngStream;

/// One logged interaction. `p` is the probability the logging policy gave to `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoggedPoint {
    pub x: usize,
    pub a: ArmIndex,
    pub p: f64,
    pub r: f64,
}

/// Averaged IPS: `(1/N) sum_{t: pi(x_t) = a_t} r_t / p_t`.
pub fn ips_estimate(policy: &Policy, data: &[LoggedPoint]) -> Result<f64> {
    if data.is_empty() {
        return Err(domain_err!("IPS needs at least one logged point"));
    }
    let mut total = 0.0;
    for pt in data {
        if !(pt.p > 0.0 && pt.p <= 1.0) {
            return Err(domain_err!("propensity {} must lie in (0,1]", pt.p));
        }
        if policy.arm(pt.x) == pt.a {
            total += pt.r / pt.p;
        }
    }
    Ok(total / data.len() as f64)
}

/// Index of the IPS-maximizing policy; one oracle call on `rho_t(a) = 1{a = a_t} r_t / p_t`.
pub fn ips_train(data: &[LoggedPoint], policies: &[Policy], k: usize) -> Result<usize> {
    let mut points = Vec::with_capacity(data.len());
    for pt in data {
        if !(pt.p > 0.0) {
            return Err(domain_err!("propensity {} must be positive", pt.p));
        }
        if pt.a >= k {
            return Err(config_err!("logged arm {} out of range for {k} arms", pt.a));
        }
        let mut rho = vec![0.0; k];
        rho[pt.a] = pt.r / pt.p;
        points.push((pt.x, rho));
    }
    super::exact_classification_oracle(&points, policies)
}

/// Uniform-logging simulation on a finite-context instance.
pub fn collect_log(env: &mut FiniteContextEnv, n: usize, rng: &RngStream) -> Result<Vec<LoggedPoint>> {
    let mut env_rng = rng.substream("env");
    let mut log_rng = rng.substream("logger");
    let k = env.num_arms();
    let mut out = Vec::with_capacity(n);
    for t in 1..=n {
        let context = env.context(t, &mut env_rng);
        let Context::Id(x) = context else {
            return Err(config_err!("expected context ids"));
        };
        let a = log_rng.index(k);
        let step = env.step(&Round { t, context }, a, &mut env_rng)?;
        out.push(LoggedPoint {
            x,
            a,
            p: 1.0 / k as f64,
            r: step.reward,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub id: u64,
    pub x: usize,
    pub a: ArmIndex,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub id: u64,
    pub r: f64,
}

/// A joined point; `missing` marks decisions that had no outcome (reward set to 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinedPoint {
    pub point: LoggedPoint,
    pub missing: bool,
}

/// Joins outcomes onto decisions by tuple id, in decision order.
pub fn join_logs(decisions: &[Decision], outcomes: &[Outcome]) -> Result<Vec<JoinedPoint>> {
    let mut rewards = HashMap::with_capacity(outcomes.len());
    for o in outcomes {
        if rewards.insert(o.id, o.r).is_some() {
            return Err(Error::Data(format!("duplicate outcome tuple id {}", o.id)));
        }
    }
    let mut seen = std::collections::HashSet::with_capacity(decisions.len());
    decisions
        .iter()
        .map(|d| {
            if !seen.insert(d.id) {
                return Err(Error::Data(format!("duplicate decision tuple id {}", d.id)));
            }
            let r = rewards.get(&d.id).copied();
            Ok(JoinedPoint {
                point: LoggedPoint {
                    x: d.x,
                    a: d.a,
                    p: d.p,
                    r: r.unwrap_or(0.0),
                },
                missing: r.is_none(),
            })
        })
        .collect()
}

/// One parsed log line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogRecord {
    Decision(Decision),
    Outcome(Outcome),
    Joined(LoggedPoint),
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| Error::Data(format!("line {line}: missing field {i}")))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::Data(format!("line {line}: cannot parse {raw:?}")))
}

/// Reads tab-separated `D id ctx arm prop`, `O id r` and `J ctx arm prop r` lines.
pub fn parse_logs<R: Read>(reader: R) -> Result<Vec<LogRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let want = match rec.get(0).map(str::trim) {
            Some("D") => 5,
            Some("O") => 3,
            Some("J") => 5,
            Some("") | None => continue,
            Some(tag) => return Err(Error::Data(format!("line {line}: unknown record tag {tag:?}"))),
        };
        if rec.len() != want {
            return Err(Error::Data(format!("line {line}: expected {want} fields, got {}", rec.len())));
        }
        out.push(match &rec[0] {
            "D" => LogRecord::Decision(Decision {
                id: field(&rec, 1, line)?,
                x: field(&rec, 2, line)?,
                a: field(&rec, 3, line)?,
                p: field(&rec, 4, line)?,
            }),
            "O" => LogRecord::Outcome(Outcome {
                id: field(&rec, 1, line)?,
                r: field(&rec, 2, line)?,
            }),
            _ => LogRecord::Joined(LoggedPoint {
                x: field(&rec, 1, line)?,
                a: field(&rec, 2, line)?,
                p: field(&rec, 3, line)?,
                r: field(&rec, 4, line)?,
            }),
        });
    }
    Ok(out)
}

/// Writes `J ctx arm prop r` lines.
pub fn write_joined<W: Write>(writer: W, points: &[LoggedPoint]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').has_headers(false).from_writer(writer);
    for pt in points {
        w.write_record(["J".to_string(), pt.x.to_string(), pt.a.to_string(), pt.p.to_string(), pt.r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
