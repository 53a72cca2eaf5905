//! The `qa-gen` subcommand: QA and grounding generation via the gateway.

use clap::Args;
use std::path::PathBuf;

use dyncog_core::gateway::{
    Gateway, ModelEndpoint, PromptTemplate, TemplateKind, TransportKind,
};
use dyncog_core::scene::{load_manifest, resample};
use dyncog_core::TARGET_FPS;

use crate::common::{write_config_echo, write_jsonl, CliError, CliResult, RunLog};

#[derive(Debug, Args, serde::Serialize)]
pub struct QaGenArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Serialized cognitive-map document to embed in prompts.
    #[arg(long)]
    pub tcm: Option<PathBuf>,
    /// Template kind slug, or `all` for all six.
    #[arg(long, default_value = "all")]
    pub kind: String,
    /// Prompt template directory overriding the built-ins
    /// (`<kind>.txt` per template).
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Mock transport fixture (canned replies).
    #[arg(long)]
    pub mock_fixture: Option<PathBuf>,
    /// HTTP endpoint base URL (chat-completion style).
    #[arg(long)]
    pub base_url: Option<String>,
    #[arg(long, default_value = "qwen3-vl")]
    pub model_name: String,
    #[arg(long, default_value = dyncog_core::gateway::DEFAULT_CREDENTIAL_ENV)]
    pub credential_env: String,
    #[arg(long, default_value_t = 120.0)]
    pub timeout_s: f64,
    #[arg(long, default_value_t = 2)]
    pub retries: u32,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn build_gateway(
    mock_fixture: Option<&PathBuf>,
    base_url: Option<&String>,
    model_name: &str,
    credential_env: &str,
    timeout_s: f64,
    retries: u32,
) -> Result<Gateway, CliError> {
    let mut gateway = match (mock_fixture, base_url) {
        (Some(path), _) => {
            let fixture =
                dyncog_core::gateway::MockFixture::load(path).map_err(CliError::from_gateway)?;
            Gateway::with_mock(fixture)
        }
        (None, Some(url)) => Gateway::new(ModelEndpoint {
            base_url: url.clone(),
            model: model_name.to_string(),
            credential_env: credential_env.to_string(),
            timeout_s,
            transport: TransportKind::Http,
        })
        .map_err(CliError::from_gateway)?,
        (None, None) => {
            return Err(CliError::usage(
                "either --mock-fixture or --base-url is required",
            ))
        }
    };
    gateway.retries = retries;
    Ok(gateway)
}

fn resolve_kinds(spec: &str) -> Result<Vec<TemplateKind>, CliError> {
    if spec == "all" {
        return Ok(TemplateKind::ALL.to_vec());
    }
    TemplateKind::parse(spec)
        .map(|k| vec![k])
        .ok_or_else(|| CliError::usage(format!("unknown template kind {spec:?}")))
}

fn load_template(kind: TemplateKind, dir: Option<&PathBuf>) -> Result<PromptTemplate, CliError> {
    match dir {
        Some(dir) => {
            let path = dir.join(format!("{}.txt", kind.slug()));
            PromptTemplate::from_file(kind, &path)
                .map_err(|e| CliError::data(anyhow::anyhow!("{}: {e}", path.display())))
        }
        None => Ok(PromptTemplate::builtin(kind)),
    }
}

pub fn run(args: QaGenArgs) -> CliResult {
    let gateway = build_gateway(
        args.mock_fixture.as_ref(),
        args.base_url.as_ref(),
        &args.model_name,
        &args.credential_env,
        args.timeout_s,
        args.retries,
    )?;
    let manifest = resample(&load_manifest(&args.manifest)?, TARGET_FPS);
    let tcm_text = match &args.tcm {
        Some(path) => Some(std::fs::read_to_string(path)?),
        None => None,
    };
    let kinds = resolve_kinds(&args.kind)?;

    std::fs::create_dir_all(&args.out)?;
    let mut log = RunLog::create(&args.out)?;
    write_config_echo(&args.out, &args)?;

    let mut qa = Vec::new();
    let mut grounding = Vec::new();
    let mut rejected = Vec::new();
    for kind in kinds {
        let template = load_template(kind, args.templates.as_ref())?;
        let generation = gateway
            .generate_qa(&manifest, tcm_text.as_deref(), &template)
            .map_err(CliError::from_gateway)?;
        log.line(&format!(
            "{}: {} qa, {} grounding, {} rejected",
            kind.slug(),
            generation.qa.len(),
            generation.grounding.len(),
            generation.rejected.len()
        ));
        qa.extend(generation.qa);
        grounding.extend(generation.grounding);
        rejected.extend(generation.rejected);
    }

    write_jsonl(&args.out.join("qa.jsonl"), &qa)?;
    write_jsonl(&args.out.join("grounding.jsonl"), &grounding)?;
    write_jsonl(&args.out.join("rejected.jsonl"), &rejected)?;
    println!(
        "{} qa items, {} grounding items -> {}",
        qa.len(),
        grounding.len(),
        args.out.display()
    );
    Ok(())
}
