int limit = 5;
int main() {
  int a = 3;
  int b = 9;
  bool r = a < limit;
  bool q = limit > b;
  assert(r && q);
  return 0;
}
