use std::io::Read;
use std::path::Path;

use crate::hyperstore::{NodeId, NodeRegistry};

use super::StatError;

/// Exogenous real-valued node attributes, `label,attr1,attr2,...` per node.
#[derive(Clone, Debug, Default)]
pub struct CovariateTable {
    names: Vec<String>,
    // values[attr][node]
    values: Vec<Vec<f64>>,
}

impl CovariateTable {
    /// Builds a table from per-attribute columns indexed by node id.
    pub fn from_columns(columns: Vec<(String, Vec<f64>)>) -> Result<Self, StatError> {
        let n = columns.first().map_or(0, |c| c.1.len());
        let mut t = CovariateTable::default();
        for (name, col) in columns {
            if col.len() != n {
                return Err(StatError::Covariates(format!("column `{name}` has {} values, expected {n}", col.len())));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(StatError::Covariates(format!("column `{name}` has a non-finite value at node {i}")));
            }
            t.names.push(name);
            t.values.push(col);
        }
        Ok(t)
    }

    pub fn load_file(path: impl AsRef<Path>, registry: &NodeRegistry) -> Result<Self, StatError> {
        let f = std::fs::File::open(path.as_ref())
            .map_err(|e| StatError::Covariates(format!("{}: {e}", path.as_ref().display())))?;
        Self::load(f, registry)
    }

    /// Reads a covariate file; every node in `registry` must have a complete
    /// row. Rows for labels absent from the registry are ignored.
    pub fn load<R: Read>(reader: R, registry: &NodeRegistry) -> Result<Self, StatError> {
        let err = |m: String| StatError::Covariates(m);
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| err(e.to_string()))?.clone();
        if header.len() < 2 {
            return Err(err("covariate header needs `label` and at least one attribute".into()));
        }
        let names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let mut values = vec![vec![f64::NAN; registry.len()]; names.len()];
        let mut seen = vec![false; registry.len()];
        let mut ignored = 0usize;
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| err(format!("line {line}: {e}")))?;
            let Some(id) = registry.get(rec.get(0).unwrap_or("")) else {
                ignored += 1;
                continue;
            };
            for (k, raw) in rec.iter().skip(1).enumerate() {
                let v: f64 =
                    raw.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                        err(format!("line {line}: missing or invalid value `{raw}` for `{}`", names[k]))
                    })?;
                values[k][id.index()] = v;
            }
            seen[id.index()] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(err(format!("no covariate row for node `{}`", registry.label(NodeId(missing as u32)))));
        }
        if ignored > 0 {
            log::warn!("{ignored} covariate rows name nodes that never occur in the events");
        }
        Ok(CovariateTable { names, values })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn attribute(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i].as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry() -> NodeRegistry {
        let mut r = NodeRegistry::new();
        r.intern("a");
        r.intern("b");
        r
    }

    #[test]
    fn loads_complete_table() {
        let t = CovariateTable::load("label,age,h\nb,40,2\na,30,1\nzed,1,1\n".as_bytes(), &registry()).unwrap();
        assert_eq!(t.attribute("age"), Some(&[30.0, 40.0][..]));
        assert_eq!(t.names(), &["age".to_owned(), "h".to_owned()]);
        assert!(t.attribute("nope").is_none());
    }

    #[test]
    fn missing_values_fail_at_load() {
        assert!(CovariateTable::load("label,age\na,30\n".as_bytes(), &registry()).is_err());
        assert!(CovariateTable::load("label,age\na,30\nb,\n".as_bytes(), &registry()).is_err());
        assert!(CovariateTable::load("label,age\na,30\nb,x\n".as_bytes(), &registry()).is_err());
    }
}
