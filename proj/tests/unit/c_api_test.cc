//
// Copyright 2026 The dperm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Exercises the shared library through its C interface only.

#include "dperm/dperm.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace {

std::string Take(char* s) {
  std::string out = s == nullptr ? "" : s;
  dperm_string_free(s);
  return out;
}

std::string Temp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dperm_capi_" + name)).string();
}

TEST(CApi, VersionAndStatusNames) {
  EXPECT_GT(std::strlen(dperm_version()), 0u);
  EXPECT_STREQ(dperm_status_name(DPERM_OK), "ok");
  EXPECT_STRNE(dperm_status_name(DPERM_PRECONDITION), dperm_status_name(DPERM_IO));
}

TEST(CApi, ArraysTrainPredictEvaluate) {
  const double x[] = {0.5, 0.1, -0.4, 0.2, 0.3, -0.3, -0.6, -0.1};
  const double y[] = {1, -1, 1, -1};
  dperm_dataset* data = nullptr;
  ASSERT_EQ(dperm_dataset_from_arrays(x, y, 4, 2, &data), DPERM_OK);
  EXPECT_EQ(dperm_dataset_size(data), 4u);
  EXPECT_EQ(dperm_dataset_dimension(data), 2u);
  double row[2], label = 0;
  ASSERT_EQ(dperm_dataset_row(data, 2, row, &label), DPERM_OK);
  EXPECT_EQ(row[0], 0.3);
  EXPECT_EQ(label, 1.0);
  EXPECT_EQ(dperm_dataset_row(data, 9, row, &label), DPERM_INVALID_ARGUMENT);

  dperm_model* model = nullptr;
  ASSERT_EQ(dperm_model_train(data, R"({"method":"nonprivate","lambda":0.01})", &model), DPERM_OK)
      << dperm_last_error();
  EXPECT_EQ(dperm_model_dimension(model), 2u);
  double score = 0;
  int predicted = 0;
  ASSERT_EQ(dperm_model_predict(model, x, 2, &score, &predicted), DPERM_OK);
  EXPECT_GT(score, 0.0);
  EXPECT_EQ(predicted, 1);
  EXPECT_EQ(dperm_model_predict(model, x, 3, &score, &predicted), DPERM_INVALID_ARGUMENT);
  EXPECT_NE(std::string(dperm_last_error()).find("dimension"), std::string::npos);

  char* counts = nullptr;
  ASSERT_EQ(dperm_model_evaluate(model, data, &counts), DPERM_OK);
  EXPECT_NE(Take(counts).find("\"false_positives\""), std::string::npos);

  char* json = nullptr;
  ASSERT_EQ(dperm_model_to_json(model, &json), DPERM_OK);
  const std::string text = Take(json);
  dperm_model* back = nullptr;
  ASSERT_EQ(dperm_model_from_json(text.c_str(), &back), DPERM_OK);
  char* again = nullptr;
  ASSERT_EQ(dperm_model_to_json(back, &again), DPERM_OK);
  EXPECT_EQ(Take(again), text);
  dperm_model_free(back);
  dperm_model_free(model);
  dperm_dataset_free(data);
}

TEST(CApi, ErrorCodes) {
  dperm_dataset* data = nullptr;
  EXPECT_EQ(dperm_dataset_load("/nonexistent/path.bin", &data), DPERM_IO);
  EXPECT_EQ(data, nullptr);
  EXPECT_EQ(dperm_dataset_synthetic("{not json", &data), DPERM_PARSE);
  ASSERT_EQ(dperm_dataset_synthetic(R"({"n": 40, "dimension": 3})", &data), DPERM_OK);
  dperm_model* model = nullptr;
  EXPECT_EQ(dperm_model_train(data, R"({"method":"output","epsilon":-1})", &model),
            DPERM_PRECONDITION);
  EXPECT_EQ(dperm_model_train(data, R"({"method":"magic"})", &model), DPERM_INVALID_ARGUMENT);
  EXPECT_EQ(dperm_model_train(data, R"({"method":"nonprivate","max_iters":1})", &model),
            DPERM_NOT_CONVERGED);
  EXPECT_EQ(dperm_model_train(nullptr, "{}", &model), DPERM_INVALID_ARGUMENT);
  dperm_dataset_free(data);
}

TEST(CApi, SplitSaveLoadTune) {
  dperm_dataset* data = nullptr;
  ASSERT_EQ(dperm_dataset_synthetic(R"({"n": 500, "dimension": 4, "seed": 3})", &data), DPERM_OK);
  dperm_dataset *train = nullptr, *val = nullptr, *test = nullptr;
  ASSERT_EQ(dperm_dataset_split(data, 0.6, 0.2, 0.2, 7, &train, &val, &test), DPERM_OK);
  EXPECT_EQ(dperm_dataset_size(train), 300u);
  EXPECT_EQ(dperm_dataset_size(test), 100u);

  const std::string path = Temp("train.bin");
  ASSERT_EQ(dperm_dataset_save(train, path.c_str(), 1), DPERM_OK);
  dperm_dataset* loaded = nullptr;
  ASSERT_EQ(dperm_dataset_load(path.c_str(), &loaded), DPERM_OK);
  EXPECT_EQ(dperm_dataset_size(loaded), 300u);
  std::filesystem::remove(path);

  dperm_model* model = nullptr;
  ASSERT_EQ(dperm_model_tune(loaded, R"({"method":"objective","lambdas":[0.001,0.01,0.1],
                                         "epsilon":1.0,"seed":2})",
                             &model),
            DPERM_OK)
      << dperm_last_error();
  char* json = nullptr;
  ASSERT_EQ(dperm_model_to_json(model, &json), DPERM_OK);
  EXPECT_NE(Take(json).find("\"tuning\""), std::string::npos);
  const std::string model_path = Temp("model.json");
  ASSERT_EQ(dperm_model_save(model, model_path.c_str()), DPERM_OK);
  dperm_model* reloaded = nullptr;
  ASSERT_EQ(dperm_model_load(model_path.c_str(), &reloaded), DPERM_OK);
  std::filesystem::remove(model_path);
  dperm_model_free(reloaded);
  dperm_model_free(model);
  for (dperm_dataset* d : {data, train, val, test, loaded}) dperm_dataset_free(d);
}

TEST(CApi, LoadTableWithReport) {
  const std::string csv = std::string(DPERM_SOURCE_DIR) + "/tests/data/toy.csv";
  const std::string schema = std::string(DPERM_SOURCE_DIR) + "/tests/data/toy_schema.json";
  const char* paths[] = {csv.c_str()};
  dperm_dataset* data = nullptr;
  char* report = nullptr;
  ASSERT_EQ(dperm_dataset_load_table(paths, 1, schema.c_str(), &data, &report), DPERM_OK)
      << dperm_last_error();
  EXPECT_EQ(dperm_dataset_size(data), 7u);
  EXPECT_NE(Take(report).find("\"rows_dropped_missing\": 1"), std::string::npos);
  dperm_dataset_free(data);
}

TEST(CApi, AuditsAndExperiments) {
  char* names = nullptr;
  ASSERT_EQ(dperm_audit_names(&names), DPERM_OK);
  EXPECT_NE(Take(names).find("det-identity"), std::string::npos);
  char* report = nullptr;
  int passed = 0;
  ASSERT_EQ(dperm_audit_run("det-identity", R"({"trials": 10})", &report, &passed), DPERM_OK);
  EXPECT_EQ(passed, 1);
  dperm_string_free(report);
  EXPECT_EQ(dperm_audit_run("nope", "{}", &report, &passed), DPERM_INVALID_ARGUMENT);

  dperm_dataset* data = nullptr;
  ASSERT_EQ(dperm_dataset_synthetic(R"({"n": 200, "dimension": 3})", &data), DPERM_OK);
  dperm_result* result = nullptr;
  ASSERT_EQ(dperm_experiment_run(data, R"({"kind":"privacy-accuracy","folds":2,"repeats":1,
                                           "epsilons":[0.5],"lambdas":[0.01]})",
                                 &result),
            DPERM_OK)
      << dperm_last_error();
  EXPECT_EQ(dperm_result_count(result), 2u + 2u + 2u);
  EXPECT_EQ(dperm_result_partial(result), 0);
  char* csv = nullptr;
  ASSERT_EQ(dperm_result_format(result, "csv", 0, &csv), DPERM_OK);
  EXPECT_EQ(Take(csv).rfind("schema_version,method", 0), 0u);
  char* summary = nullptr;
  ASSERT_EQ(dperm_result_summary(result, &summary), DPERM_OK);
  EXPECT_NE(Take(summary).find("mean_error"), std::string::npos);
  EXPECT_EQ(dperm_result_format(result, "xml", 0, &csv), DPERM_INVALID_ARGUMENT);
  dperm_result_free(result);
  dperm_dataset_free(data);
}

}  // namespace
