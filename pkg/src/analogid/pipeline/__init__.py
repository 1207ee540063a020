"""Language-model driven construction of subcircuit identifier scripts."""
from .orchestrator import (ACCEPTED, CAUTIOUS, EMPTY, Codebase, CodebaseEntry, Demo, ExecutionFailure,
                           Instruction, MalformedReply, PipelineConfig, RunLog, choose_demo,
                           extract_instruction, extract_script, fold_instructions, format_retry_summary,
                           format_status_histogram, generate_identifier, generate_instruction,
                           identify_with_codebase, merge_instructions, repair_identifier, retry_summary,
                           run_pipeline, status_histogram)
from .providers import ConfigError, HttpChatProvider, ProviderError, ScriptedProvider, provider_from_config
from .reference import ReferenceProvider
from .sandbox import (ExecutionResult, IdentifierScript, InterpreterUnavailable, SandboxSetupFailure,
                      execute_script, parse_result)
from .targets import TARGETS, Target, get_target
from .templates import TEMPLATES, MissingBinding, PromptTemplate, render_prompt
