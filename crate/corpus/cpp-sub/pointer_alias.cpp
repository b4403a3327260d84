int main() {
  int x = 1;
  int *p = &x;
  int *q = p;
  *q = 5;
  assert(x == 1);
  return 0;
}
