//! Text descriptors for catalog fields: `family:key=value,key=v1;v2`.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! `parse(format(d)) == d` holds bit for bit.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Descriptor {
    pub family: String,
    pub params: Vec<(String, Vec<f64>)>,
}

impl Descriptor {
    pub fn new(family: impl Into<String>) -> Self {
        Self {
            family: family.into(),
            params: Vec::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.push((key.into(), vec![value]));
        self
    }

    pub fn with_vec(mut self, key: impl Into<String>, values: &[f64]) -> Self {
        self.params.push((key.into(), values.to_vec()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_slice())
    }

    pub fn scalar(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some([v]) => Ok(Some(*v)),
            Some(_) => Err(self.error(format!("`{key}` takes a single number"))),
        }
    }

    pub fn scalar_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.scalar(key)?.unwrap_or(default))
    }

    pub fn require(&self, key: &str) -> Result<f64> {
        self.scalar(key)?
            .ok_or_else(|| self.error(format!("missing parameter `{key}`")))
    }

    /// Reject parameters outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.params {
            if !allowed.contains(&k.as_str()) {
                return Err(self.error(format!("unknown parameter `{k}`")));
            }
        }
        Ok(())
    }

    pub(crate) fn error(&self, reason: String) -> Error {
        Error::Descriptor {
            text: self.to_string(),
            reason,
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.family)?;
        for (i, (k, vs)) in self.params.iter().enumerate() {
            f.write_str(if i == 0 { ":" } else { "," })?;
            write!(f, "{k}=")?;
            for (j, v) in vs.iter().enumerate() {
                if j > 0 {
                    f.write_str(";")?;
                }
                write!(f, "{v}")?;
            }
        }
        Ok(())
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let err = |reason: &str| Error::Descriptor {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let text_trim = text.trim();
        let (family, rest) = match text_trim.split_once(':') {
            Some((f, r)) => (f.trim(), Some(r)),
            None => (text_trim, None),
        };
        if !is_ident(family) {
            return Err(err("family name must be alphanumeric"));
        }
        let mut out = Descriptor::new(family);
        if let Some(rest) = rest {
            for item in rest.split(',') {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| err("parameters must look like key=value"))?;
                let k = k.trim();
                if !is_ident(k) {
                    return Err(err("parameter names must be alphanumeric"));
                }
                if out.get(k).is_some() {
                    return Err(err("duplicate parameter"));
                }
                let values = v
                    .split(';')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| err("parameter values must be finite numbers"))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                out.params.push((k.to_string(), values));
            }
        }
        Ok(out)
    }
}
