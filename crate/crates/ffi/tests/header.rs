use std::path::PathBuf;
use std::process::Command;

fn header_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("peps_forge.h")
}

#[test]
fn header_declares_the_abi() {
    let header = std::fs::read_to_string(header_path()).unwrap();
    for symbol in [
        "typedef struct PfInstance PfInstance;",
        "PF_STATUS_OK = 0",
        "PF_STATUS_VERIFICATION = 1",
        "PF_STATUS_INVALID_INPUT = 2",
        "PF_STATUS_CAPACITY = 3",
        "PF_STATUS_NULL_POINTER = 4",
        "PF_STATUS_NUMERICAL = 5",
        "PF_STATUS_PANIC = 6",
        "PF_MODE_UNTIL_SUCCESS = 1",
        "pf_instance_new(const char *config_json, struct PfInstance **out)",
        "void pf_instance_free(struct PfInstance *instance)",
        "pf_run(",
        "void pf_string_free(char *s)",
        "pf_p_term(double p, uint64_t m, double *out)",
        "pf_p_fail_bound(double p, double m, double *out)",
        "pf_required_alternations(",
        "pf_cost_model(",
        "const char *pf_last_error_message(void)",
        "size_t pf_instance_vertex_count",
    ] {
        assert!(header.contains(symbol), "header lacks `{symbol}`");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let Ok(cc) = which("cc") else { return };
    for lang in ["c", "c++"] {
        let status = Command::new(&cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(header_path())
            .status()
            .unwrap();
        assert!(status.success(), "header fails to compile as {lang}");
    }
}

fn which(tool: &str) -> Result<PathBuf, ()> {
    std::env::var_os("PATH")
        .and_then(|paths| {
            std::env::split_paths(&paths)
                .map(|p| p.join(tool))
                .find(|p| p.is_file())
        })
        .ok_or(())
}
