// pinsynth-mkcorpus: write the bundled demo corpus (waveforms, alignment,
// reading table, text corpus) so the pipeline can be exercised without any
// external speech data. Output is byte-identical across runs and platforms.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pinsynth/demo.hpp"
#include "pinsynth/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the self-contained pinsynth demo corpus"};
  std::string out_dir;
  app.add_option("--out", out_dir, "Directory to create")->required();

  try {
    app.parse(argc, argv);
    pinsynth::write_demo_corpus(pinsynth::make_demo_corpus(), out_dir);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  std::printf("wrote demo corpus to %s\n", out_dir.c_str());
  std::printf("  wav/u01.wav .. wav/u10.wav   10 utterances, 16 kHz mono\n");
  std::printf("  align.txt                    character alignment\n");
  std::printf("  pinyin_table.tsv             character readings\n");
  std::printf("  texts.tsv                    100 synthesis texts\n");
  return 0;
}
