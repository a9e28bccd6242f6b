use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

/// Which column of a CSV file holds the class token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
}

impl LabelColumn {
    fn resolve(self, n_columns: usize) -> Result<usize> {
        match self {
            LabelColumn::Last => Ok(n_columns - 1),
            LabelColumn::Index(i) if i < n_columns => Ok(i),
            LabelColumn::Index(i) => Err(Error::validation(format!(
                "label column {i} out of range for {n_columns} columns"
            ))),
        }
    }
}

/// Reads a comma-separated file. A first row whose feature cells are all
/// non-numeric is taken as a header. Class tokens are numbered by first
/// appearance.
pub fn load_csv(path: impl AsRef<Path>, label_column: LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_csv(file, &name, label_column)
}

pub fn parse_csv(reader: impl Read, name: &str, label_column: LabelColumn) -> Result<Dataset> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut class_ids: HashMap<String, usize> = HashMap::new();
    let mut n_columns = None;
    let mut label_idx = 0;
    let mut first = true;

    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let width = *n_columns.get_or_insert(record.len());
        if width < 2 {
            return Err(Error::Parse {
                line,
                message: "need at least one feature column and a label column".into(),
            });
        }
        if record.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} columns, found {}", record.len()),
            });
        }
        if first {
            first = false;
            label_idx = label_column.resolve(width)?;
            let is_header = record
                .iter()
                .enumerate()
                .filter(|&(c, _)| c != label_idx)
                .all(|(_, cell)| cell.parse::<f64>().is_err());
            if is_header {
                continue;
            }
        }
        for (c, cell) in record.iter().enumerate() {
            if c == label_idx {
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {}: `{cell}` is not a number", c + 1),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("column {}: non-finite value `{cell}`", c + 1),
                });
            }
            features.push(value);
        }
        let token = &record[label_idx];
        let id = *class_ids.entry(token.to_string()).or_insert_with(|| {
            class_names.push(token.to_string());
            class_names.len() - 1
        });
        labels.push(id);
    }

    let Some(width) = n_columns else {
        return Err(Error::validation(format!("`{name}` holds no data rows")));
    };
    if labels.is_empty() {
        return Err(Error::validation(format!("`{name}` holds no data rows")));
    }
    if class_names.len() < 2 {
        return Err(Error::validation(format!(
            "`{name}` contains a single class `{}`",
            class_names[0]
        )));
    }
    Dataset::new(name, features, width - 1, labels, class_names)
}

/// Writes `f0,..,f{D-1},label` with a header row and class names as tokens.
pub fn write_csv(dataset: &Dataset, writer: impl Write) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(writer);
    let csv_err = |e: ::csv::Error| Error::validation(format!("csv write failed: {e}"));
    let header: Vec<String> = (0..dataset.n_features())
        .map(|j| format!("f{j}"))
        .chain(std::iter::once("label".to_string()))
        .collect();
    w.write_record(&header).map_err(csv_err)?;
    for (row, &label) in dataset.rows().zip(dataset.labels()) {
        let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        cells.push(dataset.class_names()[label].clone());
        w.write_record(&cells).map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::validation(format!("csv write failed: {e}")))?;
    Ok(())
}

pub fn save_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(dataset, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset> {
        parse_csv(text.as_bytes(), "t", LabelColumn::Last)
    }

    #[test]
    fn first_appearance_label_mapping() {
        let d = parse("1.0,2.0,a\n3.0,4.0,b\n5.0,6.0,a\n").unwrap();
        assert_eq!((d.len(), d.n_features(), d.n_classes()), (3, 2, 2));
        assert_eq!(d.labels(), &[0, 1, 0]);
        assert_eq!(d.class_names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn header_is_detected() {
        let d = parse("x,y,class\n1,2,a\n3,4,b\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn non_numeric_feature_names_its_line() {
        let err = parse("1.0,2.0,a\n1.0,x,a\n3,3,b\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        // Partially numeric first row is data, not a header.
        assert!(matches!(
            parse("1.0,x,a\n2,3,b\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn wrong_column_count() {
        let err = parse("1,2,a\n1,2,3,b\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn single_class_is_rejected() {
        assert!(matches!(parse("1,a\n2,a\n"), Err(Error::Validation(_))));
    }

    #[test]
    fn label_column_by_index() {
        let d = parse_csv("a,1,2\nb,3,4\n".as_bytes(), "t", LabelColumn::Index(0)).unwrap();
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.labels(), &[0, 1]);
    }

    #[test]
    fn write_then_parse_preserves_content() {
        let d = parse("0.1,1e-300,z\n-2.5,7,y\n3,0.30000000000000004,z\n").unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let back = parse_csv(buf.as_slice(), "t", LabelColumn::Last).unwrap();
        assert!(d.same_content(&back));
        assert_eq!(d, back);
    }
}
