#pragma once

// Published reference tables used as golden data by the unit and
// acceptance tests. Cells are kept as printed; "" marks an empty cell.

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace golden {

// Ratio columns are relative to the first perf column.
inline constexpr std::array<std::string_view, 4> kSystems = {"A100", "H100", "MI300X", "Gaudi2"};

struct ResultRow {
  std::string_view bench;
  std::array<std::string_view, 3> ratio;  // H100, MI300X, Gaudi2
  std::array<std::string_view, 4> perf;   // A100, H100, MI300X, Gaudi2
};

inline const std::vector<ResultRow> kMainResults = {
    {"reformer", {"1.67", "0.81", "0.63"}, {"62.3", "103.7", "50.5", "39.1"}},
    {"bert-tf32-fp16", {"1.75", "0.77", "0.66"}, {"264.7", "462.9", "202.6", "175.8"}},
    {"llm-lora-single", {"1.86", "0.98", "0.41"}, {"2.7K", "5.1K", "2.7K", "1.1K"}},
    {"llm-lora-ddp-gpus", {"1.75", "0.79", "0.32"}, {"16.8K", "29.3K", "13.2K", "5.3K"}},
    {"llm-lora-ddp-nodes", {"3.13", "1.78", ""}, {"17.9K", "56.2K", "31.9K", ""}},
    {"llm-lora-mp-gpus", {"1.91", "1.11", "0.34"}, {"2.0K", "3.8K", "2.2K", "680.0"}},
    {"llm-full-mp-gpus", {"2.32", "1.68", "2.15"}, {"195.2", "453.4", "327.8", "419.3"}},
    {"llm-full-mp-nodes", {"5.51", "4.87", ""}, {"146.1", "805.3", "710.7", ""}},
    {"llama", {"1.57", "0.19", "0.43"}, {"493.3", "774.0", "92.6", "211.0"}},
    {"vjepa-gpus", {"2.03", "0.58", "0.31"}, {"127.7", "259.8", "73.6", "40.1"}},
    {"vjepa-single", {"1.91", "0.55", "0.25"}, {"21.3", "40.8", "11.8", "5.3"}},
    {"resnet50", {"1.96", "1.97", "3.17"}, {"854.3", "1.7K", "1.7K", "2.7K"}},
    {"lightning-gpus", {"3.09", "1.86", "1.10"}, {"3.1K", "9.6K", "5.8K", "3.4K"}},
    {"convnext_large-tf32-fp16", {"1.95", "0.71", "0.86"}, {"339.1", "662.8", "239.5", "293.2"}},
    {"regnet_y_128gf", {"1.57", "0.85", "1.45"}, {"119.5", "187.3", "102.0", "173.3"}},
    {"dinov2-giant-gpus", {"1.92", "", ""}, {"447.1", "856.8", "", ""}},
    {"diffusion-gpus", {"3.16", "0.94", ""}, {"120.3", "380.1", "113.5", ""}},
    {"diffusion-nodes", {"3.41", "0.94", ""}, {"227.6", "775.2", "212.8", ""}},
    {"llava-single", {"1.75", "0.88", "0.31"}, {"2.3", "4.0", "2.0", "0.7"}},
    {"torchatari", {"1.54", "0.64", "0.49"}, {"6.0K", "9.3K", "3.9K", "3.0K"}},
    {"ppo", {"1.20", "0.67", ""}, {"32.2M", "38.8M", "21.5M", ""}},
    {"brax", {"1.21", "0.23", ""}, {"727.5K", "877.9K", "170.4K", ""}},
    {"rlhf-single", {"2.75", "1.56", ""}, {"1.1K", "3.1K", "1.8K", ""}},
    {"pna", {"1.66", "0.67", ""}, {"4.0K", "6.6K", "2.7K", ""}},
    {"dimenet", {"1.50", "0.64", ""}, {"373.1", "560.2", "237.6", ""}},
    {"recursiongfn", {"1.47", "1.21", ""}, {"7.4K", "10.9K", "8.9K", ""}},
};

inline constexpr ResultRow kMainGlobal = {"Global Score", {"1.93", "0.74", "0.02"}, {"1170.9", "2263.7", "866.7", "24.8"}};

inline double main_weight(std::string_view bench) {
  return bench == "pna" || bench == "dimenet" || bench == "recursiongfn" ? 2.0 : 1.0;
}

inline const std::vector<ResultRow> kOptionalResults = {
    {"bf16", {"2.67", "2.65", "1.44"}, {"293", "784", "777", "422"}},
    {"fp16", {"2.76", "2.67", "1.47"}, {"289", "797", "772", "427"}},
    {"tf32", {"2.82", "0.76", "0.73"}, {"146", "413", "111", "107"}},
    {"fp32", {"2.71", "5.78", "5.60"}, {"19", "52", "111", "107"}},
    {"convnext_large-tf32-fp16", {"1.95", "0.71", "0.86"}, {"339", "663", "240", "293"}},
    {"convnext_large-fp16", {"1.98", "0.72", "0.88"}, {"334", "659", "240", "293"}},
    {"convnext_large-tf32", {"1.54", "1.22", "1.01"}, {"156", "239", "189", "157"}},
    {"convnext_large-fp32", {"2.17", "3.20", "2.65"}, {"60", "129", "190", "157"}},
    {"bert-tf32-fp16", {"1.75", "0.77", "0.66"}, {"265", "463", "203", "176"}},
    {"bert-fp16", {"1.75", "0.77", "0.65"}, {"265", "462", "203", "172"}},
    {"bert-tf32", {"1.72", "0.52", "0.90"}, {"142", "244", "74", "128"}},
    {"bert-fp32", {"2.48", "1.65", "2.86"}, {"45", "111", "74", "128"}},
    {"resnet50", {"1.96", "1.97", "3.17"}, {"854", "1K", "1K", "2K"}},
    {"resnet50-noio", {"1.77", "1.91", "3.47"}, {"1K", "2K", "2K", "4K"}},
    {"lightning", {"1.80", "1.49", "1.60"}, {"681", "1K", "1K", "1K"}},
    {"lightning-gpus", {"3.09", "1.86", "1.10"}, {"3K", "9K", "5K", "3K"}},
    {"dinov2-giant-single", {"1.92", "", ""}, {"54", "103", "", ""}},
    {"dinov2-giant-gpus", {"1.92", "", ""}, {"447", "857", "", ""}},
    {"diffusion-single", {"2.11", "0.64", ""}, {"24", "51", "16", ""}},
    {"diffusion-gpus", {"3.16", "0.94", ""}, {"120", "380", "114", ""}},
    {"diffusion-nodes", {"3.41", "0.94", ""}, {"228", "775", "213", ""}},
    {"rlhf-single", {"2.75", "1.56", ""}, {"1K", "3K", "1K", ""}},
    {"rlhf-gpus", {"2.60", "1.98", ""}, {"6K", "16K", "12K", ""}},
};

// Model-type annotation counts. Rows are true labels followed by NTL;
// columns are predicted labels followed by NPL.
inline const std::vector<std::string_view> kModelTypeClasses = {
    "CNN", "Diffusion model", "Gflow nets", "GNN", "MLP", "RNN", "Transformer", "N/A"};

inline const std::vector<std::vector<std::int64_t>> kModelTypeGrid = {
    {23, 0, 0, 0, 0, 0, 0, 1, 6},
    {0, 4, 0, 0, 0, 0, 0, 0, 1},
    {0, 0, 5, 0, 0, 0, 0, 0, 0},
    {0, 0, 0, 10, 0, 0, 0, 0, 4},
    {0, 0, 0, 0, 2, 0, 0, 0, 1},
    {0, 0, 0, 0, 0, 3, 0, 0, 3},
    {0, 0, 0, 0, 0, 0, 38, 2, 6},
    {0, 0, 0, 1, 0, 0, 0, 48, 18},
    {1, 0, 0, 0, 0, 0, 1, 6, 0},
};

inline constexpr std::array<int, 8> kModelTypePrecision = {96, 100, 100, 91, 100, 100, 97, 84};
inline constexpr std::array<int, 8> kModelTypeRecall = {77, 80, 100, 71, 67, 50, 83, 72};

}  // namespace golden
