//! The live `.fds` file that collected samples are appended to.

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, PoisonError};

use hcr_core::{Dataset, Result, Sample};

/// Append-only sample file with a single writer.
///
/// Every record is written with one `write_all` and synced before the new
/// count is returned. A torn final line (no trailing newline) left by a crash
/// is cut off when the store is opened.
#[derive(Debug)]
pub struct SampleStore {
    path: PathBuf,
    inner: Mutex<Inner>,
}

#[derive(Debug)]
struct Inner {
    file: File,
    len: u64,
    count: usize,
}

impl SampleStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(&path)?;
        let mut text = String::new();
        file.read_to_string(&mut text)?;
        if !text.is_empty() && !text.ends_with('\n') {
            let keep = text.rfind('\n').map_or(0, |i| i + 1);
            log::warn!(
                "{}: dropping {} bytes of an incomplete final record",
                path.display(),
                text.len() - keep
            );
            file.set_len(keep as u64)?;
            file.sync_data()?;
            text.truncate(keep);
        }
        let count = Dataset::from_text(&text)?.len();
        Ok(SampleStore {
            path,
            inner: Mutex::new(Inner {
                file,
                len: text.len() as u64,
                count,
            }),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn count(&self) -> usize {
        self.lock().count
    }

    /// Append one record durably and return the new total.
    pub fn append(&self, sample: &Sample) -> io::Result<usize> {
        let mut line = sample.to_record();
        line.push('\n');
        let mut inner = self.lock();
        let written = inner
            .file
            .write_all(line.as_bytes())
            .and_then(|_| inner.file.sync_data());
        if let Err(e) = written {
            // Leave no partial record behind for the next append to extend.
            let _ = inner.file.set_len(inner.len);
            return Err(e);
        }
        inner.len += line.len() as u64;
        inner.count += 1;
        Ok(inner.count)
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(PoisonError::into_inner)
    }
}
