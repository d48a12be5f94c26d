#include "stgcn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "stgcn/keyvalue.hpp"
#include "stgcn/rng.hpp"

namespace stgcn {

void sgd_step(ParameterStore& store, double learning_rate) {
    for (auto& entry : store) {
        if (!entry.grad.all_finite()) {
            throw std::runtime_error("sgd_step: non-finite gradient for parameter '" +
                                     entry.name + "'");
        }
    }
    for (auto& entry : store) {
        double* v = entry.value.data();
        double* g = entry.grad.data();
        for (std::size_t i = 0; i < entry.value.size(); ++i) {
            v[i] -= learning_rate * g[i];
            g[i] = 0.0;
        }
    }
}

namespace {

// SGD with the optional momentum / weight-decay knobs; reduces to sgd_step
// semantics when both are zero.
void sgd_step_extended(ParameterStore& store, double lr, double momentum, double weight_decay,
                       std::vector<Tensor>& velocity) {
    if (momentum == 0.0 && weight_decay == 0.0) {
        sgd_step(store, lr);
        return;
    }
    if (velocity.empty()) {
        for (std::size_t i = 0; i < store.count(); ++i) {
            velocity.emplace_back(store.value(i).shape());
        }
    }
    for (auto& entry : store) {
        if (!entry.grad.all_finite()) {
            throw std::runtime_error("sgd_step: non-finite gradient for parameter '" +
                                     entry.name + "'");
        }
    }
    for (std::size_t i = 0; i < store.count(); ++i) {
        double* v = store.value(i).data();
        double* g = store.grad(i).data();
        double* vel = velocity[i].data();
        for (std::size_t k = 0; k < store.value(i).size(); ++k) {
            double step = g[k] + weight_decay * v[k];
            vel[k] = momentum * vel[k] + step;
            v[k] -= lr * vel[k];
            g[k] = 0.0;
        }
    }
}

}  // namespace

double lr_at(const TrainConfig& config, std::size_t epoch) {
    double lr = config.learning_rate;
    for (std::size_t milestone : config.decay_epochs) {
        if (epoch >= milestone) lr *= config.decay_factor;
    }
    return lr;
}

std::string TrainReport::to_csv() const {
    std::string out = "epoch,train_loss,train_acc,test_acc,seconds\n";
    for (const EpochStats& e : epochs) {
        out += std::to_string(e.epoch) + "," + format_double(e.train_loss) + "," +
               format_double(e.train_accuracy) + "," + format_double(e.test_accuracy) + "," +
               format_double(e.seconds) + "\n";
    }
    return out;
}

EvalResult evaluate_predictions(const std::vector<std::size_t>& labels,
                                const std::vector<std::size_t>& predictions,
                                std::size_t num_classes) {
    if (labels.empty()) {
        throw std::invalid_argument("evaluate: empty split");
    }
    if (labels.size() != predictions.size()) {
        throw std::invalid_argument("evaluate: label/prediction count mismatch");
    }
    EvalResult r;
    r.total = labels.size();
    r.per_class_total.assign(num_classes, 0);
    r.per_class_correct.assign(num_classes, 0);
    r.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::size_t truth = labels[i], pred = predictions[i];
        if (truth >= num_classes || pred >= num_classes) {
            throw std::invalid_argument("evaluate: class index out of range");
        }
        ++r.per_class_total[truth];
        ++r.confusion[truth][pred];
        if (truth == pred) {
            ++r.correct;
            ++r.per_class_correct[truth];
        }
    }
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
    return r;
}

std::size_t configured_threads() {
    const char* env = std::getenv("STGCN_KIT_THREADS");
    if (!env || *env == '\0') return 1;
    std::size_t n = 0;
    try {
        n = static_cast<std::size_t>(parse_uint(env));
    } catch (const std::exception&) {
        throw std::runtime_error("STGCN_KIT_THREADS must be a positive integer, got '" +
                                 std::string(env) + "'");
    }
    if (n == 0) {
        throw std::runtime_error("STGCN_KIT_THREADS must be a positive integer, got '0'");
    }
    return n;
}

EvalResult evaluate(Model& model, const std::vector<SkeletonSequence>& split) {
    if (split.empty()) {
        throw std::invalid_argument("evaluate: empty split");
    }
    std::vector<std::size_t> labels(split.size());
    std::vector<std::size_t> predictions(split.size());
    for (std::size_t i = 0; i < split.size(); ++i) labels[i] = split[i].label;

    std::size_t threads = std::min(configured_threads(), split.size());
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Tensor logits = model_forward(model, split[i].joints, Mode::kEval);
            predictions[i] = predict_label(logits);
        }
    };
    if (threads <= 1) {
        worker(0, split.size());
    } else {
        // Eval mode never mutates the model; disjoint output slots keep this
        // bitwise identical to the serial path.
        std::vector<std::thread> pool;
        std::size_t chunk = (split.size() + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t) {
            std::size_t begin = t * chunk;
            std::size_t end = std::min(split.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return evaluate_predictions(labels, predictions, model.config.num_classes);
}

TrainOutputs train(const ModelConfig& model_config, const TrainConfig& train_config,
                   const Dataset& dataset) {
    if (train_config.epochs < 1) {
        throw std::invalid_argument("train: epochs must be >= 1");
    }
    if (train_config.learning_rate <= 0.0) {
        throw std::invalid_argument("train: learning rate must be positive");
    }
    if (dataset.train.empty() || dataset.test.empty()) {
        throw std::invalid_argument("train: dataset must have non-empty train and test splits");
    }
    std::filesystem::create_directories(train_config.out_dir);

    TrainOutputs out;
    out.model = build_model(model_config);
    Model& model = out.model;
    std::vector<Tensor> velocity;
    std::string last_checkpoint;

    for (std::size_t epoch = 0; epoch < train_config.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        double lr = lr_at(train_config, epoch);
        auto batches = make_batches(dataset.train, train_config.batch_size,
                                    derive_seed(train_config.seed, epoch));
        double loss_sum = 0.0;
        std::size_t correct = 0, seen = 0;
        for (const Batch& batch : batches) {
            const std::size_t b_n = batch.labels.size();
            ForwardTrace trace;
            Tensor logits = forward_batch(model, batch.inputs, Mode::kTrain, &trace);
            Tensor grad_logits({b_n, model.config.num_classes});
            double batch_loss = 0.0;
            for (std::size_t b = 0; b < b_n; ++b) {
                Tensor row({model.config.num_classes});
                for (std::size_t k = 0; k < row.size(); ++k) row[k] = logits.at(b, k);
                SoftmaxResult sm = softmax_cross_entropy(row, batch.labels[b]);
                batch_loss += sm.loss;
                if (predict_label(row) == batch.labels[b]) ++correct;
                Tensor grow = softmax_cross_entropy_backward(sm, batch.labels[b],
                                                             1.0 / static_cast<double>(b_n));
                for (std::size_t k = 0; k < grow.size(); ++k) grad_logits.at(b, k) = grow[k];
            }
            batch_loss /= static_cast<double>(b_n);
            if (!std::isfinite(batch_loss)) {
                throw DivergenceError(last_checkpoint);
            }
            loss_sum += batch_loss * static_cast<double>(b_n);
            seen += b_n;
            backward_batch(model, trace, grad_logits);
            sgd_step_extended(model.store, lr, train_config.momentum, train_config.weight_decay,
                              velocity);
        }
        EpochStats stats;
        stats.epoch = epoch + 1;
        stats.train_loss = loss_sum / static_cast<double>(seen);
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
        stats.test_accuracy = evaluate(model, dataset.test).accuracy;
        stats.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.report.epochs.push_back(stats);
        if (train_config.checkpoint_interval > 0 &&
            (epoch + 1) % train_config.checkpoint_interval == 0) {
            std::string path =
                train_config.out_dir + "/checkpoint_" + std::to_string(epoch + 1) + ".ckpt";
            save_checkpoint(model, path);
            last_checkpoint = path;
        }
    }
    out.final_checkpoint = train_config.out_dir + "/checkpoint_final.ckpt";
    save_checkpoint(model, out.final_checkpoint);
    out.report.parameter_total = count_parameters(model).total;
    return out;
}

}  // namespace stgcn
