//! Cartesian decomposition of data tables.
//!
//! Every `(attribute, value)` pair becomes a variable and every row the
//! monomial of its cells. Factors of that polynomial are the tables whose
//! unordered cross product gives back the input; variables dividing the
//! whole polynomial are constant columns.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{factor_complete, Driver, FactorConfig};
use crate::poly::{Polynomial, VarTable};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DataTable {
    pub attributes: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl DataTable {
    /// Validates arity, distinct attribute names and distinct rows.
    pub fn new(attributes: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::data("table has no attributes"));
        }
        let mut seen = HashSet::new();
        for a in &attributes {
            if !seen.insert(a.as_str()) {
                return Err(Error::data(format!("duplicate attribute `{a}`")));
            }
        }
        let mut seen = HashSet::new();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != attributes.len() {
                return Err(Error::data(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    r.len(),
                    attributes.len()
                )));
            }
            if !seen.insert(r) {
                return Err(Error::data(format!(
                    "row {} duplicates an earlier row; rows would cancel, rerun with --dedupe",
                    i + 1
                )));
            }
        }
        Ok(DataTable { attributes, rows })
    }

    /// Reads CSV with a mandatory header row; cells are trimmed.
    pub fn from_csv<R: io::Read>(reader: R, dedupe: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let csv_err = |e: csv::Error| Error::data(format!("csv: {e}"));
        let attributes: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        for rec in rdr.records() {
            let row: Vec<String> = rec.map_err(csv_err)?.iter().map(String::from).collect();
            if dedupe && !seen.insert(row.clone()) {
                continue;
            }
            rows.push(row);
        }
        DataTable::new(attributes, rows)
    }

    pub fn to_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::data(format!("csv: {e}"));
        w.write_record(&self.attributes).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::data(format!("csv: {e}")))
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Columns sorted by attribute name and rows sorted, for comparisons
    /// that ignore column and row order.
    pub fn normalized(&self) -> DataTable {
        let mut perm: Vec<usize> = (0..self.attributes.len()).collect();
        perm.sort_by(|&i, &j| self.attributes[i].cmp(&self.attributes[j]));
        let attributes = perm.iter().map(|&i| self.attributes[i].clone()).collect();
        let mut rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| perm.iter().map(|&i| r[i].clone()).collect())
            .collect();
        rows.sort();
        DataTable { attributes, rows }
    }

    fn row_set(&self) -> BTreeSet<BTreeMap<&str, &str>> {
        self.rows
            .iter()
            .map(|r| {
                self.attributes
                    .iter()
                    .map(String::as_str)
                    .zip(r.iter().map(String::as_str))
                    .collect()
            })
            .collect()
    }
}

/// The polynomial of a table with the map from its variables back to cells.
#[derive(Clone, Debug)]
pub struct TableEncoding {
    pub poly: Polynomial,
    /// `decode[v] = (attribute index, value)`.
    pub decode: Vec<(usize, String)>,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// One variable per `(attribute, value)` pair, one monomial per row.
///
/// Variables are named `value_attribute` when every such name is an
/// identifier and the names are distinct; otherwise `c{column}_{k}`.
pub fn table_to_polynomial(t: &DataTable) -> Result<TableEncoding> {
    let t = DataTable::new(t.attributes.clone(), t.rows.clone())?;
    if t.rows.is_empty() {
        return Err(Error::data("table has no rows"));
    }
    let mut cells: Vec<(usize, String)> = Vec::new();
    let mut index: HashMap<(usize, &str), usize> = HashMap::new();
    for r in &t.rows {
        for (col, v) in r.iter().enumerate() {
            index.entry((col, v.as_str())).or_insert_with(|| {
                cells.push((col, v.clone()));
                cells.len() - 1
            });
        }
    }
    let readable: Vec<String> = cells
        .iter()
        .map(|(col, v)| format!("{v}_{}", t.attributes[*col]))
        .collect();
    let distinct: HashSet<&String> = readable.iter().collect();
    let names: Vec<String> = if distinct.len() == readable.len() && readable.iter().all(|n| is_ident(n)) {
        readable
    } else {
        let mut per_col = vec![0usize; t.attributes.len()];
        cells
            .iter()
            .map(|(col, _)| {
                per_col[*col] += 1;
                format!("c{col}_{}", per_col[*col] - 1)
            })
            .collect()
    };
    let vars = Arc::new(VarTable::new(names.iter().cloned())?);
    let mut decode = vec![(0, String::new()); cells.len()];
    let mut var_of_cell = Vec::with_capacity(cells.len());
    for (name, cell) in names.iter().zip(&cells) {
        let v = vars.lookup(name).expect("name was inserted");
        decode[v] = cell.clone();
        var_of_cell.push(v);
    }
    let monomials: Vec<Vec<usize>> = t
        .rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(col, v)| var_of_cell[index[&(col, v.as_str())]])
                .collect()
        })
        .collect();
    let poly = Polynomial::from_monomials(vars, monomials)?;
    Ok(TableEncoding { poly, decode })
}

/// Decodes a polynomial over a table's variables back into a table whose
/// columns follow the input attribute order.
pub fn polynomial_to_table(p: &Polynomial, enc: &TableEncoding, attributes: &[String]) -> Result<DataTable> {
    let cols: BTreeSet<usize> = p.support().iter().map(|v| enc.decode[v].0).collect();
    let cols: Vec<usize> = cols.into_iter().collect();
    let mut rows = Vec::with_capacity(p.num_monomials());
    for m in p.monomial_indices() {
        let mut row: Vec<Option<String>> = vec![None; cols.len()];
        for v in m {
            let (col, value) = &enc.decode[v];
            let slot = cols.binary_search(col).expect("column of support");
            if row[slot].replace(value.clone()).is_some() {
                return Err(Error::defect(format!(
                    "factor row has two values for attribute `{}`",
                    attributes[*col]
                )));
            }
        }
        let row: Option<Vec<String>> = row.into_iter().collect();
        rows.push(row.ok_or_else(|| Error::defect("factor row misses an attribute"))?);
    }
    rows.sort();
    DataTable::new(cols.iter().map(|&c| attributes[c].clone()).collect(), rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MergeConstants {
    /// Report constant columns separately.
    #[default]
    Separate,
    /// Merge into the table with the fewest rows (lowest index on ties).
    Auto,
    Into(usize),
}

impl std::str::FromStr for MergeConstants {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "separate" => Ok(MergeConstants::Separate),
            "auto" => Ok(MergeConstants::Auto),
            k => k
                .parse()
                .map(MergeConstants::Into)
                .map_err(|_| Error::data(format!("bad merge target `{s}`: expected auto, none or an index"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableDecomposition {
    pub tables: Vec<DataTable>,
    pub constant_columns: Vec<(String, String)>,
}

impl TableDecomposition {
    /// Cross product of all tables extended by the constant columns, with
    /// columns in `attributes` order.
    pub fn reconstruct(&self, attributes: &[String]) -> Result<DataTable> {
        let mut partial: Vec<BTreeMap<&str, &str>> = vec![self
            .constant_columns
            .iter()
            .map(|(a, v)| (a.as_str(), v.as_str()))
            .collect()];
        for t in &self.tables {
            let mut next = Vec::with_capacity(partial.len() * t.rows.len());
            for p in &partial {
                for r in &t.rows {
                    let mut q = p.clone();
                    q.extend(t.attributes.iter().map(String::as_str).zip(r.iter().map(String::as_str)));
                    next.push(q);
                }
            }
            partial = next;
        }
        let rows = partial
            .iter()
            .map(|p| {
                attributes
                    .iter()
                    .map(|a| {
                        p.get(a.as_str())
                            .map(|v| v.to_string())
                            .ok_or_else(|| Error::defect(format!("attribute `{a}` not covered")))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        DataTable::new(attributes.to_vec(), rows)
    }
}

/// Splits `t` into tables over disjoint attributes whose cross product,
/// with the constant columns, is `t`. The result is checked by
/// reconstruction before it is returned.
pub fn decompose_table(t: &DataTable, merge: MergeConstants, cfg: &FactorConfig) -> Result<TableDecomposition> {
    let enc = table_to_polynomial(t)?;
    let fz = factor_complete(&enc.poly, Driver::ModFd, cfg)?;
    let mut constant_columns = Vec::new();
    for d in &fz.trivial {
        let var = match d.monomial_indices().as_slice() {
            [m] if m.len() == 1 => m[0],
            _ => return Err(Error::defect(format!("unexpected trivial divisor {d}"))),
        };
        let (col, value) = &enc.decode[var];
        constant_columns.push((*col, value.clone()));
    }
    constant_columns.sort();
    let mut tables = fz
        .factors
        .iter()
        .map(|f| polynomial_to_table(f, &enc, &t.attributes))
        .collect::<Result<Vec<_>>>()?;
    tables.sort_by_key(|tb| t.attributes.iter().position(|a| *a == tb.attributes[0]));
    let mut constant_columns: Vec<(String, String)> = constant_columns
        .into_iter()
        .map(|(c, v)| (t.attributes[c].clone(), v))
        .collect();

    let target = match merge {
        MergeConstants::Separate => None,
        _ if constant_columns.is_empty() => None,
        MergeConstants::Auto => Some(
            (0..tables.len())
                .min_by_key(|&i| (tables[i].num_rows(), i))
                .unwrap_or(0),
        ),
        MergeConstants::Into(k) if k < tables.len().max(1) => Some(k),
        MergeConstants::Into(k) => {
            return Err(Error::data(format!(
                "merge target {k} out of range: {} tables",
                tables.len()
            )))
        }
    };
    if let Some(k) = target {
        if tables.is_empty() {
            tables.push(DataTable {
                attributes: Vec::new(),
                rows: vec![Vec::new()],
            });
        }
        let consts = std::mem::take(&mut constant_columns);
        let tb = &mut tables[k];
        let mut merged: Vec<(usize, String, Option<String>)> = tb
            .attributes
            .iter()
            .enumerate()
            .map(|(i, a)| (i, a.clone(), None))
            .collect();
        merged.extend(consts.into_iter().map(|(a, v)| (usize::MAX, a, Some(v))));
        merged.sort_by_key(|(_, a, _)| t.attributes.iter().position(|x| x == a));
        let rows = tb
            .rows
            .iter()
            .map(|r| {
                merged
                    .iter()
                    .map(|(i, _, v)| v.clone().unwrap_or_else(|| r[*i].clone()))
                    .collect()
            })
            .collect();
        *tb = DataTable::new(merged.into_iter().map(|(_, a, _)| a).collect(), rows)?;
    }

    let out = TableDecomposition {
        tables,
        constant_columns,
    };
    if out.reconstruct(&t.attributes)?.row_set() != t.row_set() {
        return Err(Error::defect("decomposition does not reproduce the input rows"));
    }
    Ok(out)
}
