#pragma once

#include <array>
#include <string_view>

namespace zspeedl::acceptance {

// Reference accuracies (percent, two decimals) per method and backbone:
// ZSL MCA and GZSL U, S, H on each dataset.
struct ReferenceCell {
  double mca, u, s, h;
};

struct ReferenceRow {
  std::string_view method;
  std::string_view backbone;
  std::array<ReferenceCell, 4> cells;
};

inline constexpr std::array<std::string_view, 4> kReferenceDatasets{"AWA2", "CUB", "SUN", "APY"};

inline constexpr std::array<ReferenceRow, 30> kReferenceTable{{
    {"ESZSL", "ResNet101", {{{55.11, 4.66, 87.07, 8.86}, {53.02, 14.29, 63.73, 23.35}, {52.99, 12.15, 28.22, 16.99}, {33.62, 1.07, 72.24, 2.11}}}},
    {"ESZSL", "MobileNet", {{{50.91, 8.04, 79.32, 14.60}, {45.45, 14.22, 52.13, 22.34}, {49.58, 10.49, 22.64, 14.33}, {36.00, 1.65, 66.23, 3.21}}}},
    {"ESZSL", "MobileNetV2", {{{55.89, 4.56, 83.94, 8.65}, {47.02, 9.96, 55.71, 16.89}, {50.83, 10.76, 23.37, 14.74}, {33.41, 1.81, 68.91, 3.52}}}},
    {"ESZSL", "Xception", {{{54.68, 3.44, 86.67, 6.61}, {47.83, 9.55, 56.23, 16.33}, {49.58, 9.44, 25.93, 13.85}, {35.39, 2.32, 69.75, 4.48}}}},
    {"ESZSL", "EfficientNetB7", {{{55.16, 3.42, 87.41, 6.57}, {55.35, 13.45, 63.37, 22.19}, {51.60, 11.25, 26.98, 15.88}, {29.92, 1.50, 69.62, 2.93}}}},
    {"SAE", "ResNet101", {{{51.71, 4.34, 85.39, 8.26}, {40.55, 14.10, 52.55, 22.24}, {50.35, 15.97, 23.10, 18.89}, {17.41, 0.6, 18.02, 1.16}}}},
    {"SAE", "MobileNet", {{{47.49, 3.40, 77.62, 6.51}, {28.47, 15.87, 55.74, 24.70}, {29.72, 5.69, 8.76, 6.90}, {10.86, 0.69, 8.32, 1.27}}}},
    {"SAE", "MobileNetV2", {{{52.89, 4.66, 87.07, 8.86}, {34.73, 9.21, 43.77, 15.22}, {39.44, 9.93, 15.89, 12.22}, {12.3, 0.71, 5.25, 1.25}}}},
    {"SAE", "Xception", {{{51.59, 1.25, 87.64, 2.47}, {33.06, 8.84, 44.32, 14.74}, {41.11, 9.65, 16.32, 12.13}, {9.75, 0.71, 6.68, 1.28}}}},
    {"SAE", "EfficientNetB7", {{{51.94, 3.59, 85.70, 6.89}, {43.07, 10.59, 57.61, 17.90}, {48.89, 12.71, 22.05, 16.12}, {26.93, 0.93, 53.70, 1.83}}}},
    {"DEM", "ResNet101", {{{63.29, 29.21, 84.60, 43.42}, {47.02, 21.56, 46.66, 29.49}, {62.57, 20.0, 36.94, 25.95}, {41.98, 11.54, 71.28, 19.86}}}},
    {"DEM", "MobileNet", {{{60.66, 26.59, 81.87, 40.14}, {46.48, 20.21, 49.61, 28.72}, {59.58, 18.61, 36.78, 24.72}, {36.91, 10.59, 67.87, 18.31}}}},
    {"DEM", "MobileNetV2", {{{59.68, 27.25, 84.37, 41.19}, {47.43, 20.30, 44.59, 27.89}, {61.32, 18.26, 32.91, 23.49}, {32.13, 10.27, 66.71, 17.80}}}},
    {"DEM", "Xception", {{{57.73, 21.98, 86.09, 35.02}, {41.6, 15.78, 31.66, 21.06}, {55.9, 13.89, 27.52, 18.46}, {29.86, 9.61, 59.53, 16.54}}}},
    {"DEM", "EfficientNetB7", {{{59.95, 19.14, 87.04, 31.38}, {37.1, 11.49, 26.41, 16.02}, {47.36, 12.15, 20.58, 15.28}, {25.54, 6.37, 44.10, 11.14}}}},
    {"f-CLSWGAN", "ResNet101", {{{61.87, 9.69, 90.89, 17.52}, {49.92, 20.93, 62.45, 31.35}, {56.32, 28.47, 32.71, 30.46}, {28.1, 2.64, 76.92, 5.11}}}},
    {"f-CLSWGAN", "MobileNet", {{{61.87, 10.07, 89.46, 18.10}, {45.89, 27.13, 53.39, 35.98}, {52.92, 33.13, 25.85, 29.04}, {29.81, 2.71, 76.14, 5.24}}}},
    {"f-CLSWGAN", "MobileNetV2", {{{62.73, 11.94, 89.73, 21.07}, {51.75, 38.46, 49.22, 43.18}, {55.83, 36.81, 26.59, 30.87}, {26.43, 2.45, 78.61, 4.76}}}},
    {"f-CLSWGAN", "Xception", {{{49.78, 7.11, 89.96, 13.17}, {47.13, 27.78, 53.39, 36.54}, {53.54, 29.03, 30.89, 29.93}, {24.29, 2.99, 64.41, 5.71}}}},
    {"f-CLSWGAN", "EfficientNetB7", {{{48.56, 0.50, 90.12, 1.0}, {38.73, 5.96, 55.39, 10.76}, {46.53, 25.69, 23.26, 24.41}, {22.41, 0.5, 75.82, 0.98}}}},
    {"TF-VAEGAN", "ResNet101", {{{69.34, 57.60, 74.04, 64.79}, {66.92, 57.91, 64.52, 61.04}, {63.96, 46.60, 38.10, 41.92}, {40.1, 11.15, 76.54, 19.46}}}},
    {"TF-VAEGAN", "MobileNet", {{{65.93, 52.61, 70.06, 60.09}, {60.02, 48.14, 56.76, 52.10}, {61.88, 45.63, 33.80, 38.83}, {38.83, 10.24, 68.57, 17.82}}}},
    {"TF-VAEGAN", "MobileNetV2", {{{66.32, 53.33, 74.65, 62.22}, {61.87, 50.55, 56.43, 53.33}, {62.5, 46.88, 34.26, 39.59}, {36.75, 10.99, 70.28, 19.0}}}},
    {"TF-VAEGAN", "Xception", {{{67.64, 53.90, 78.76, 64.00}, {58.37, 44.52, 53.24, 48.49}, {60.21, 39.51, 30.35, 34.33}, {37.11, 11.81, 72.20, 20.21}}}},
    {"TF-VAEGAN", "EfficientNetB7", {{{73.55, 54.92, 81.62, 65.66}, {68.39, 51.43, 65.77, 57.72}, {57.92, 36.04, 32.75, 34.32}, {39.44, 12.05, 78.25, 20.88}}}},
    {"CE-GZSL", "ResNet101", {{{64.5, 23.03, 90.46, 36.71}, {60.72, 56.75, 48.72, 52.43}, {60.14, 45.14, 35.85, 39.96}, {39.3, 31.07, 50.69, 38.53}}}},
    {"CE-GZSL", "MobileNet", {{{62.66, 20.39, 86.98, 33.04}, {52.71, 39.89, 49.17, 44.04}, {55.0, 40.14, 32.83, 36.12}, {38.15, 29.40, 53.67, 37.99}}}},
    {"CE-GZSL", "MobileNetV2", {{{64.73, 20.18, 88.56, 32.87}, {56.24, 48.37, 45.38, 46.83}, {57.22, 44.10, 32.83, 37.64}, {36.23, 30.82, 44.72, 36.49}}}},
    {"CE-GZSL", "Xception", {{{61.8, 16.71, 89.80, 28.18}, {52.34, 39.22, 53.14, 45.13}, {56.39, 38.33, 30.31, 33.85}, {35.82, 11.81, 72.20, 20.21}}}},
    {"CE-GZSL", "EfficientNetB7", {{{55.96, 19.76, 90.35, 32.43}, {57.39, 50.24, 51.14, 50.68}, {53.54, 37.15, 31.36, 34.01}, {36.85, 25.87, 49.19, 33.91}}}},
}};

}  // namespace zspeedl::acceptance
