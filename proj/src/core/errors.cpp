#include "assist/core/errors.h"

#include <exception>

namespace assist {

namespace {

template <typename E>
[[noreturn]] void rethrow_as(const std::string& context, const std::exception& e) {
  throw E(context + ": " + e.what());
}

}  // namespace

void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const IndexError& e) {
    rethrow_as<IndexError>(context, e);
  } catch (const DimensionError& e) {
    rethrow_as<DimensionError>(context, e);
  } catch (const DomainError& e) {
    rethrow_as<DomainError>(context, e);
  } catch (const BoundsError& e) {
    rethrow_as<BoundsError>(context, e);
  } catch (const FormatError& e) {
    rethrow_as<FormatError>(context, e);
  } catch (const GeometryError& e) {
    rethrow_as<GeometryError>(context, e);
  } catch (const PreconditionError& e) {
    rethrow_as<PreconditionError>(context, e);
  } catch (const ConfigError& e) {
    rethrow_as<ConfigError>(context, e);
  } catch (const ResourceError& e) {
    rethrow_as<ResourceError>(context, e);
  } catch (const IoError& e) {
    rethrow_as<IoError>(context, e);
  } catch (const std::exception& e) {
    rethrow_as<Error>(context, e);
  }
}

}  // namespace assist
