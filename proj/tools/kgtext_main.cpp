// Command-line entry point.  Subcommands cover the full pipeline:
// convert -> preprocess -> train -> generate / evaluate, plus ablation
// suites, synthetic corpus generation, and plot data export.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.

#include <iostream>

#include <CLI11.hpp>

#include "kgtext/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"kgtext: knowledge-graph-to-text generation pipeline"};
  app.require_subcommand(1);

  kgtext::ConvertArgs conv;
  CLI::App* c_conv = app.add_subcommand("convert", "Convert an external dataset dump to jsonl");
  c_conv->add_option("--input", conv.input, "input dataset file")->required();
  c_conv->add_option("--format", conv.format, "input format: webnlg|dart|jsonl")->required();
  c_conv->add_option("--output", conv.output, "output jsonl path")->required();
  c_conv->callback([&] { kgtext::cmd_convert(conv); });

  kgtext::PreprocessArgs pre;
  CLI::App* c_pre = app.add_subcommand("preprocess", "Build vocab and supervision sidecar");
  c_pre->add_option("--input", pre.input, "input dataset file")->required();
  c_pre->add_option("--format", pre.format, "input format: webnlg|dart|jsonl");
  c_pre->add_option("--output-dir", pre.output_dir, "output directory")->required();
  c_pre->add_option("--n-slots", pre.n_slots, "padded triplet slot count N");
  c_pre->add_option("--tagger", pre.tagger, "POS tagger id");
  c_pre->add_option("--min-count", pre.min_count, "min token frequency for vocab");
  c_pre->add_option("--max-vocab", pre.max_vocab, "max vocab size (0 = unbounded)");
  c_pre->add_option("--oversize", pre.oversize, "oversize graph policy: reject|truncate");
  c_pre->callback([&] { kgtext::cmd_preprocess(pre); });

  kgtext::SynthArgs synth;
  CLI::App* c_synth = app.add_subcommand("synth", "Generate a built-in synthetic corpus");
  c_synth->add_option("--kind", synth.kind, "corpus kind: sorting|fixture|ablation")->required();
  c_synth->add_option("--output", synth.output, "output jsonl (train half for ablation)")
      ->required();
  c_synth->add_option("--eval-output", synth.eval_output,
                      "ablation eval half (default <output>_eval.jsonl)");
  c_synth->add_option("--n", synth.n, "example count (0 = kind default)");
  c_synth->add_option("--n-eval", synth.n_eval, "ablation eval example count");
  c_synth->add_option("--n-planted", synth.n_planted, "ablation shared entity pool size");
  c_synth->add_option("--n-slots", synth.n_slots, "sorting corpus slot count");
  c_synth->add_option("--seed", synth.seed, "corpus seed (default per kind)");
  c_synth->callback([&] { kgtext::cmd_synth(synth); });

  kgtext::TrainCmdArgs tr;
  CLI::App* c_train = app.add_subcommand("train", "Train on a preprocessed directory");
  c_train->add_option("--data-dir", tr.data_dir, "cmd_preprocess output directory")->required();
  c_train->add_option("--config", tr.config, "config JSON ({model,train,sorter} sections)");
  c_train->add_option("--run-dir", tr.run_dir,
                      "run directory (default $KGTEXT_RUN_ROOT/runs/run-seed<seed>)");
  c_train->add_option("--epochs", tr.epochs, "override epochs");
  c_train->add_option("--batch-size", tr.batch_size, "override batch size");
  c_train->add_option("--lr", tr.lr, "override learning rate");
  c_train->add_option("--seed", tr.seed, "override training seed");
  c_train->add_option("--d-model", tr.d_model, "override model width");
  c_train->add_option("--rel-window", tr.rel_window, "override relative-position window");
  c_train->add_option("--window", tr.window, "override copy-gate context window");
  c_train->add_flag("--no-cp", tr.no_cp, "drop the copy mechanism");
  c_train->add_flag("--no-pos", tr.no_pos, "drop the POS branch");
  c_train->add_flag("--no-sc", tr.no_sc, "drop the semantic gate component");
  c_train->add_flag("--no-fusion", tr.no_fusion, "skip encoder POS fusion");
  c_train->add_option("--order-mode", tr.order_mode,
                      "inference order: learned|node_level|random|gold|input");
  c_train->add_option("--pos-scope", tr.pos_scope, "POS tagging scope: local|global");
  c_train->callback([&] { kgtext::cmd_train(tr); });

  kgtext::GenerateArgs gen;
  CLI::App* c_gen = app.add_subcommand("generate", "Decode hypotheses from a checkpoint");
  c_gen->add_option("--checkpoint", gen.checkpoint, "checkpoint file")->required();
  c_gen->add_option("--input", gen.input, "input dataset file")->required();
  c_gen->add_option("--format", gen.format, "input format: webnlg|dart|jsonl");
  c_gen->add_option("--output", gen.output, "hypotheses jsonl path")->required();
  c_gen->add_option("--supervision", gen.supervision, "supervision sidecar (gold order)");
  c_gen->add_option("--order-mode", gen.order_mode,
                    "linearization order: learned|node_level|random|gold|input");
  c_gen->add_option("--beam", gen.beam, "beam width");
  c_gen->add_option("--max-len", gen.max_len, "max decode length (0 = model limit)");
  c_gen->add_option("--threshold", gen.threshold, "copy threshold (<0 = checkpoint value)");
  c_gen->add_option("--seed", gen.seed, "seed for the random order mode");
  c_gen->add_flag("--trace", gen.trace, "also write per-step copy-decision traces");
  c_gen->callback([&] { kgtext::cmd_generate(gen); });

  kgtext::EvaluateArgs ev;
  CLI::App* c_eval = app.add_subcommand("evaluate", "Score a checkpoint on a split");
  c_eval->add_option("--checkpoint", ev.checkpoint, "checkpoint file")->required();
  c_eval->add_option("--input", ev.input, "dataset file with references")->required();
  c_eval->add_option("--format", ev.format, "input format: webnlg|dart|jsonl");
  c_eval->add_option("--supervision", ev.supervision, "supervision sidecar");
  c_eval->add_option("--output-dir", ev.output_dir, "report directory")->required();
  c_eval->add_option("--order-mode", ev.order_mode,
                     "linearization order: learned|node_level|random|gold|input");
  c_eval->add_option("--beam", ev.beam, "beam width");
  c_eval->add_option("--max-len", ev.max_len, "max decode length (0 = model limit)");
  c_eval->add_option("--threshold", ev.threshold, "copy threshold (<0 = checkpoint value)");
  c_eval->add_option("--seed", ev.seed, "seed for the random order mode");
  c_eval->add_option("--oversize", ev.oversize, "oversize graph policy: reject|truncate");
  c_eval->callback([&] { kgtext::cmd_evaluate(ev); });

  kgtext::AblateArgs ab;
  CLI::App* c_ab = app.add_subcommand("ablate", "Run an ablation suite on synthetic data");
  c_ab->add_option("--suite", ab.suite, "suite: copy|order|window|pos_scope")->required();
  c_ab->add_option("--output-dir", ab.output_dir, "report directory")->required();
  c_ab->add_option("--config", ab.config, "config JSON overriding the built-in recipe");
  c_ab->add_option("--variants", ab.variants, "comma-separated variant filter");
  c_ab->add_option("--seeds", ab.seeds, "training seeds")->delimiter(',');
  c_ab->add_option("--n-train", ab.n_train, "training examples");
  c_ab->add_option("--n-eval", ab.n_eval, "eval examples");
  c_ab->add_option("--n-planted", ab.n_planted, "shared entity pool size");
  c_ab->add_option("--corpus-seed", ab.corpus_seed, "corpus seed");
  c_ab->add_option("--epochs", ab.epochs, "override recipe epochs");
  c_ab->add_option("--beam", ab.beam, "beam width");
  c_ab->callback([&] { kgtext::cmd_ablate(ab); });

  kgtext::PlotArgs plot;
  CLI::App* c_plot = app.add_subcommand("plot", "Render sweep CSVs as SVG charts");
  c_plot->add_option("--input", plot.inputs, "input csv files")->required()->expected(-1);
  c_plot->add_option("--output-dir", plot.output_dir, "chart directory")->required();
  c_plot->callback([&] { kgtext::cmd_plot(plot); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // --help exits 0; bad usage exits 2
  } catch (const kgtext::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const kgtext::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const kgtext::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
