use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use semtk_core::embed::{EmbeddingProviderConfig, Provider};
use semtk_core::llm::{ChatConfig, ChatModel, HttpChat, ScriptedChat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderFlag {
    Http,
    File,
    Mock,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProviderArgs {
    /// Embedding backend.
    #[arg(long, value_enum, default_value = "mock")]
    pub provider: ProviderFlag,
    /// Base URL of an OpenAI-compatible embeddings server.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long, default_value = "mock")]
    pub model: String,
    /// Prepended to every text before embedding.
    #[arg(long, default_value = "")]
    pub instruction: String,
    /// Precomputed vectors for `--provider file`.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Persistent embedding cache (JSONL).
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub mock_dim: usize,
}

impl ProviderArgs {
    pub fn config(&self, seed: u64) -> Result<EmbeddingProviderConfig> {
        let mut cfg = match self.provider {
            ProviderFlag::Mock => EmbeddingProviderConfig {
                model_id: self.model.clone(),
                ..EmbeddingProviderConfig::mock(self.mock_dim, seed)
            },
            ProviderFlag::Http => {
                let url = self.endpoint.clone().context("--provider http needs --endpoint")?;
                EmbeddingProviderConfig::http(url, &self.model)
            }
            ProviderFlag::File => {
                let path = self.embeddings.clone().context("--provider file needs --embeddings")?;
                EmbeddingProviderConfig::file(path, &self.model)
            }
        };
        cfg.instruction = self.instruction.clone();
        cfg.cache_path = self.cache.clone();
        Ok(cfg)
    }

    pub fn build(&self, seed: u64) -> Result<Provider> {
        Ok(Provider::from_config(&self.config(seed)?)?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChatArgs {
    /// JSON object mapping template ids to lists of canned responses.
    #[arg(long)]
    pub chat_script: Option<PathBuf>,
    /// Base URL of an OpenAI-compatible chat server.
    #[arg(long)]
    pub chat_endpoint: Option<String>,
    #[arg(long, default_value = "gpt-3.5-turbo")]
    pub chat_model: String,
}

impl ChatArgs {
    pub fn build(&self) -> Result<Box<dyn ChatModel>> {
        match (&self.chat_script, &self.chat_endpoint) {
            (Some(path), None) => Ok(Box::new(
                ScriptedChat::from_json_file(path)
                    .with_context(|| format!("loading chat script {}", path.display()))?,
            )),
            (None, Some(url)) => Ok(Box::new(HttpChat::new(&ChatConfig::new(url, &self.chat_model))?)),
            (Some(_), Some(_)) => bail!("give either --chat-script or --chat-endpoint, not both"),
            (None, None) => bail!("this command needs a chat model: --chat-script or --chat-endpoint"),
        }
    }
}
