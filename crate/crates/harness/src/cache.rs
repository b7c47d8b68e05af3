//! On-disk response cache keyed by model, prompt hash and request shape.

use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use anabench_core::prompt_hash;
use anabench_core::model::{Completion, CompletionRequest, ModelClient, ModelError, Token};

#[derive(Serialize, Deserialize)]
struct Entry {
    model: String,
    prompt_hash: String,
    max_tokens: u32,
    echo: bool,
    completion: Completion,
}

/// Wraps a client and stores each completion as one JSON file.
pub struct CachedClient<M> {
    inner: M,
    dir: PathBuf,
}

impl<M: ModelClient> CachedClient<M> {
    pub fn new(inner: M, dir: impl AsRef<Path>) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir.as_ref())?;
        Ok(CachedClient { inner, dir: dir.as_ref().to_path_buf() })
    }

    fn path(&self, request: &CompletionRequest) -> PathBuf {
        let mut h = Sha256::new();
        for part in [self.inner.id(), &prompt_hash(&request.prompt), &request.max_tokens.to_string(), &request.echo.to_string()] {
            h.update(part.as_bytes());
            h.update([0u8]);
        }
        self.dir.join(format!("{}.json", hex::encode(h.finalize())))
    }
}

impl<M: ModelClient> ModelClient for CachedClient<M> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        let path = self.path(request);
        if let Ok(text) = std::fs::read_to_string(&path) {
            match serde_json::from_str::<Entry>(&text) {
                Ok(e) => return Ok(e.completion),
                Err(err) => warn!("ignoring corrupt cache entry {}: {err}", path.display()),
            }
        }
        let completion = self.inner.complete(request)?;
        let entry = Entry {
            model: self.inner.id().to_string(),
            prompt_hash: prompt_hash(&request.prompt),
            max_tokens: request.max_tokens,
            echo: request.echo,
            completion,
        };
        let tmp = path.with_extension("tmp");
        let written = serde_json::to_vec(&entry)
            .map_err(std::io::Error::other)
            .and_then(|bytes| std::fs::write(&tmp, bytes))
            .and_then(|_| std::fs::rename(&tmp, &path));
        if let Err(e) = written {
            warn!("cannot write cache entry {}: {e}", path.display());
        }
        Ok(entry.completion)
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, ModelError> {
        Ok(self.complete(&CompletionRequest::score(text))?.prompt_tokens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting(AtomicUsize);

    impl ModelClient for Counting {
        fn id(&self) -> &str {
            "counting"
        }
        fn complete(&self, r: &CompletionRequest) -> Result<Completion, ModelError> {
            let n = self.0.fetch_add(1, Ordering::SeqCst);
            Ok(Completion { text: format!("{n}:{}", r.max_tokens), ..Completion::default() })
        }
    }

    #[test]
    fn second_call_is_free() {
        let dir = tempfile::tempdir().unwrap();
        let c = CachedClient::new(Counting(AtomicUsize::new(0)), dir.path()).unwrap();
        let a = c.complete(&CompletionRequest::generate("p", 10)).unwrap();
        let b = c.complete(&CompletionRequest::generate("p", 10)).unwrap();
        let other = c.complete(&CompletionRequest::generate("p", 11)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
        assert_eq!(c.inner.0.load(Ordering::SeqCst), 2);
    }
}
